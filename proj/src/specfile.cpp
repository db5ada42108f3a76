#include "csm/specfile.hpp"

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>

#include "csm/errors.hpp"

namespace csm {

namespace {

struct Token {
    std::string text;
    int line = 0;
};

struct Lexer {
    std::vector<Token> tokens;
    std::size_t pos = 0;
    std::string origin;

    explicit Lexer(const std::string& text, std::string origin_) : origin(std::move(origin_)) {
        int line = 1;
        std::string current;
        auto flush = [&](int at) {
            if (!current.empty()) {
                tokens.push_back({current, at});
                current.clear();
            }
        };
        for (std::size_t i = 0; i < text.size(); ++i) {
            char c = text[i];
            if (c == '#') {
                flush(line);
                while (i < text.size() && text[i] != '\n') ++i;
                ++line;
                continue;
            }
            if (c == '\n') {
                flush(line);
                ++line;
                continue;
            }
            if (c == ' ' || c == '\t' || c == '\r') {
                flush(line);
                continue;
            }
            if (c == '{' || c == '}') {
                flush(line);
                tokens.push_back({std::string(1, c), line});
                continue;
            }
            current.push_back(c);
        }
        flush(line);
    }

    bool done() const { return pos >= tokens.size(); }
    const Token& peek() const {
        if (done()) throw ParseError(origin + ": unexpected end of file");
        return tokens[pos];
    }
    Token next() {
        Token t = peek();
        ++pos;
        return t;
    }
    void expect(const std::string& text) {
        Token t = next();
        if (t.text != text)
            throw ParseError(origin + ":" + std::to_string(t.line) + ": expected '" + text + "', got '" +
                             t.text + "'");
    }
    [[noreturn]] void fail(const Token& t, const std::string& msg) const {
        throw ParseError(origin + ":" + std::to_string(t.line) + ": " + msg);
    }
};

double parse_number(Lexer& lex) {
    Token t = lex.next();
    char* end = nullptr;
    double v = std::strtod(t.text.c_str(), &end);
    if (end == nullptr || *end != '\0') lex.fail(t, "expected a number, got '" + t.text + "'");
    return v;
}

std::vector<std::string> parse_word_block(Lexer& lex) {
    lex.expect("{");
    std::vector<std::string> words;
    while (lex.peek().text != "}") words.push_back(lex.next().text);
    lex.expect("}");
    return words;
}

struct NumberBlock {
    std::vector<double> values;
    std::vector<Rational> exact;
};

NumberBlock parse_number_block(Lexer& lex) {
    lex.expect("{");
    NumberBlock out;
    while (lex.peek().text != "}") {
        Token t = lex.next();
        char* end = nullptr;
        double v = std::strtod(t.text.c_str(), &end);
        if (end == nullptr || *end != '\0') lex.fail(t, "expected a number, got '" + t.text + "'");
        out.values.push_back(v);
        out.exact.push_back(rational_from_decimal(t.text));
    }
    lex.expect("}");
    return out;
}

std::vector<int> parse_index_block(Lexer& lex) {
    lex.expect("{");
    std::vector<int> out;
    while (lex.peek().text != "}") {
        Token t = lex.next();
        char* end = nullptr;
        long v = std::strtol(t.text.c_str(), &end, 10);
        if (end == nullptr || *end != '\0') lex.fail(t, "expected an index, got '" + t.text + "'");
        out.push_back(static_cast<int>(v));
    }
    lex.expect("}");
    return out;
}

LoadedFile parse_model(Lexer& lex) {
    lex.expect("model");
    lex.expect("{");
    std::vector<std::string> var_names;
    std::vector<int> var_sizes;
    std::vector<std::string> region_names;
    std::vector<std::vector<std::string>> region_var_names;
    std::map<std::string, NumberBlock> hamiltonians;
    double beta = 1.0;
    while (lex.peek().text != "}") {
        Token t = lex.next();
        if (t.text == "variable") {
            Token name = lex.next();
            auto sizes = parse_index_block(lex);
            if (sizes.size() != 1) lex.fail(name, "variable wants a single cardinality");
            var_names.push_back(name.text);
            var_sizes.push_back(sizes[0]);
        } else if (t.text == "region") {
            Token name = lex.next();
            region_names.push_back(name.text);
            region_var_names.push_back(parse_word_block(lex));
        } else if (t.text == "hamiltonian") {
            Token name = lex.next();
            hamiltonians[name.text] = parse_number_block(lex);
        } else if (t.text == "beta") {
            auto block = parse_number_block(lex);
            if (block.values.size() != 1) lex.fail(t, "beta wants a single number");
            beta = block.values[0];
        } else {
            lex.fail(t, "unknown model directive '" + t.text + "'");
        }
    }
    lex.expect("}");
    if (!lex.done()) lex.fail(lex.peek(), "trailing content after the model block");

    std::vector<std::vector<int>> region_vars;
    for (const auto& names : region_var_names) {
        std::vector<int> vars;
        for (const auto& n : names) {
            auto it = std::find(var_names.begin(), var_names.end(), n);
            if (it == var_names.end()) throw ParseError(lex.origin + ": region references unknown variable '" + n + "'");
            vars.push_back(static_cast<int>(it - var_names.begin()));
        }
        region_vars.push_back(std::move(vars));
    }
    RegionModel regions = make_region_model(var_names, var_sizes, region_names, region_vars);
    std::vector<std::vector<double>> terms;
    for (std::size_t r = 0; r < regions.region_vars.size(); ++r) {
        auto it = hamiltonians.find(regions.region_names[r]);
        if (it == hamiltonians.end()) {
            terms.emplace_back(static_cast<std::size_t>(regions.spaces[r].size()), 0.0);
        } else {
            if (static_cast<int>(it->second.values.size()) != regions.spaces[r].size())
                throw ParseError(lex.origin + ": hamiltonian size mismatch at region '" +
                                 regions.region_names[r] + "'");
            terms.push_back(it->second.values);
        }
    }
    for (const auto& [name, block] : hamiltonians)
        if (std::find(regions.region_names.begin(), regions.region_names.end(), name) ==
            regions.region_names.end())
            throw ParseError(lex.origin + ": hamiltonian for unknown region '" + name + "'");

    LoadedFile out;
    out.kind = LoadedFile::Kind::Model;
    out.model = make_joint_model(std::move(regions), std::move(terms), beta);
    return out;
}

LoadedFile parse_spec(Lexer& lex) {
    std::vector<std::string> elements;
    std::vector<std::pair<std::string, std::string>> covers;
    std::map<std::string, std::vector<std::string>> spaces;
    struct GMapDecl {
        std::string upper, lower;
        std::vector<int> map;
    };
    struct FKernelDecl {
        std::string lower, upper;
        NumberBlock entries;
    };
    std::vector<GMapDecl> gmaps;
    std::vector<FKernelDecl> fkernels;
    std::map<std::string, NumberBlock> hamiltonians;
    std::map<std::string, int> decomposition_dims;
    std::optional<double> beta;
    bool saw_poset = false;

    while (!lex.done()) {
        Token t = lex.next();
        if (t.text == "poset") {
            saw_poset = true;
            lex.expect("{");
            while (lex.peek().text != "}") {
                Token inner = lex.next();
                if (inner.text == "elements") {
                    for (auto& e : parse_word_block(lex)) elements.push_back(std::move(e));
                } else if (inner.text == "cover") {
                    auto pair = parse_word_block(lex);
                    if (pair.size() != 2) lex.fail(inner, "cover wants exactly two elements");
                    covers.emplace_back(pair[0], pair[1]);
                } else {
                    lex.fail(inner, "unknown poset directive '" + inner.text + "'");
                }
            }
            lex.expect("}");
        } else if (t.text == "space") {
            Token name = lex.next();
            spaces[name.text] = parse_word_block(lex);
        } else if (t.text == "gmap") {
            GMapDecl d;
            d.upper = lex.next().text;
            d.lower = lex.next().text;
            d.map = parse_index_block(lex);
            gmaps.push_back(std::move(d));
        } else if (t.text == "fkernel") {
            FKernelDecl d;
            d.lower = lex.next().text;
            d.upper = lex.next().text;
            d.entries = parse_number_block(lex);
            fkernels.push_back(std::move(d));
        } else if (t.text == "hamiltonian") {
            Token name = lex.next();
            hamiltonians[name.text] = parse_number_block(lex);
        } else if (t.text == "beta") {
            auto block = parse_number_block(lex);
            if (block.values.size() != 1) lex.fail(t, "beta wants a single number");
            beta = block.values[0];
        } else if (t.text == "decomposition") {
            Token name = lex.next();
            auto dims = parse_index_block(lex);
            if (dims.size() != 1) lex.fail(name, "decomposition wants a single dimension per element");
            decomposition_dims[name.text] = dims[0];
        } else {
            lex.fail(t, "unknown directive '" + t.text + "'");
        }
    }
    if (!saw_poset) throw ParseError(lex.origin + ": missing poset block");

    FinitePoset poset = FinitePoset::from_pairs(elements, covers);
    std::vector<FiniteSpace> space_list;
    for (const auto& name : poset.elements()) {
        auto it = spaces.find(name);
        if (it == spaces.end()) throw ParseError(lex.origin + ": no space declared for element '" + name + "'");
        space_list.push_back(make_space(it->second));
    }
    LoadedFile out;
    out.kind = LoadedFile::Kind::Spec;
    out.spec.emplace(poset, space_list);
    auto element_index = [&](const std::string& name) {
        int i = poset.index_of(name);
        if (i < 0) throw ParseError(lex.origin + ": unknown element '" + name + "'");
        return i;
    };
    for (auto& d : gmaps) out.spec->set_down_map(element_index(d.upper), element_index(d.lower), d.map);
    for (auto& d : fkernels) {
        int lo = element_index(d.lower), up = element_index(d.upper);
        out.spec->set_up_kernel(lo, up,
                                make_kernel(space_list[static_cast<std::size_t>(lo)],
                                            space_list[static_cast<std::size_t>(up)], d.entries.values));
        out.spec->set_up_kernel_exact(lo, up, d.entries.exact);
    }
    out.spec->fill_composite_legs();
    out.validation = validate_specification(*out.spec);

    if (!hamiltonians.empty()) {
        HamiltonianFamily h;
        h.beta = beta.value_or(1.0);
        for (int a = 0; a < poset.size(); ++a) {
            auto it = hamiltonians.find(poset.name(a));
            if (it == hamiltonians.end()) {
                h.h.emplace_back(static_cast<std::size_t>(space_list[static_cast<std::size_t>(a)].size()), 0.0);
            } else {
                if (static_cast<int>(it->second.values.size()) != space_list[static_cast<std::size_t>(a)].size())
                    throw ParseError(lex.origin + ": hamiltonian size mismatch at '" + poset.name(a) + "'");
                h.h.push_back(it->second.values);
            }
        }
        out.hamiltonians = std::move(h);
    } else if (beta) {
        HamiltonianFamily h = zero_hamiltonians(space_list, *beta);
        out.hamiltonians = std::move(h);
    }
    if (!decomposition_dims.empty()) {
        ProjectiveDecomposition dec;
        dec.dims.assign(static_cast<std::size_t>(poset.size()), 0);
        for (const auto& [name, dim] : decomposition_dims)
            dec.dims[static_cast<std::size_t>(element_index(name))] = dim;
        out.decomposition = std::move(dec);
    }
    return out;
}

}  // namespace

LoadedFile parse_document(const std::string& text, const std::string& origin) {
    Lexer lex(text, origin);
    if (!lex.done() && lex.peek().text == "model") return parse_model(lex);
    return parse_spec(lex);
}

LoadedFile load_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_document(buf.str(), path);
}

BeliefFamily parse_beliefs(const std::string& text, const FinitePoset& poset,
                           const std::vector<FiniteSpace>& spaces, const std::string& origin) {
    Lexer lex(text, origin);
    std::map<int, std::vector<double>> entries;
    while (!lex.done()) {
        Token t = lex.next();
        if (t.text != "beliefs" && t.text != "section")
            lex.fail(t, "expected a 'beliefs' or 'section' block");
        Token name = lex.next();
        int a = poset.index_of(name.text);
        if (a < 0) lex.fail(name, "unknown element '" + name.text + "'");
        entries[a] = parse_number_block(lex).values;
    }
    BeliefFamily family;
    for (int a = 0; a < poset.size(); ++a) {
        auto it = entries.find(a);
        if (it == entries.end())
            throw ParseError(origin + ": no beliefs given for element '" + poset.name(a) + "'");
        family.push_back(normalized_dist(spaces[static_cast<std::size_t>(a)], it->second));
    }
    return family;
}

BeliefFamily load_beliefs(const std::string& path, const FinitePoset& poset,
                          const std::vector<FiniteSpace>& spaces) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_beliefs(buf.str(), poset, spaces, path);
}

std::string format_double(double x) {
    char buf[64];
    for (int precision = 1; precision <= 17; ++precision) {
        std::snprintf(buf, sizeof buf, "%.*g", precision, x);
        if (std::strtod(buf, nullptr) == x) return buf;
    }
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

std::string serialize_spec(const ASpecification& spec, const HamiltonianFamily* hamiltonians,
                           const ProjectiveDecomposition* decomposition) {
    std::ostringstream os;
    const auto& poset = spec.poset();
    os << "poset {\n  elements {";
    for (const auto& e : poset.elements()) os << " " << e;
    os << " }\n";
    for (auto [b, a] : poset.cover_pairs()) os << "  cover { " << poset.name(b) << " " << poset.name(a) << " }\n";
    os << "}\n";
    for (int a = 0; a < poset.size(); ++a) {
        os << "space " << poset.name(a) << " {";
        for (const auto& o : spec.space(a).outcomes) os << " " << o;
        os << " }\n";
    }
    for (auto [b, a] : poset.cover_pairs()) {
        os << "gmap " << poset.name(a) << " " << poset.name(b) << " {";
        for (int img : spec.down_map(a, b)) os << " " << img;
        os << " }\n";
        os << "fkernel " << poset.name(b) << " " << poset.name(a) << " {\n";
        const Kernel& f = spec.up_kernel(b, a);
        for (int r = 0; r < spec.space_size(b); ++r) {
            os << " ";
            for (int c = 0; c < spec.space_size(a); ++c) os << " " << format_double(f.at(r, c));
            os << "\n";
        }
        os << "}\n";
    }
    if (hamiltonians) {
        for (int a = 0; a < poset.size(); ++a) {
            os << "hamiltonian " << poset.name(a) << " {";
            for (double v : hamiltonians->h[static_cast<std::size_t>(a)]) os << " " << format_double(v);
            os << " }\n";
        }
        os << "beta { " << format_double(hamiltonians->beta) << " }\n";
    }
    if (decomposition)
        for (int a = 0; a < poset.size(); ++a)
            os << "decomposition " << poset.name(a) << " { "
               << decomposition->dims[static_cast<std::size_t>(a)] << " }\n";
    return os.str();
}

std::string serialize_model(const JointModel& model) {
    std::ostringstream os;
    os << "model {\n";
    for (std::size_t i = 0; i < model.regions.var_names.size(); ++i)
        os << "  variable " << model.regions.var_names[i] << " { " << model.regions.var_sizes[i] << " }\n";
    for (std::size_t r = 0; r < model.regions.region_names.size(); ++r) {
        os << "  region " << model.regions.region_names[r] << " {";
        for (int v : model.regions.region_vars[r]) os << " " << model.regions.var_names[static_cast<std::size_t>(v)];
        os << " }\n";
    }
    for (std::size_t r = 0; r < model.terms.size(); ++r) {
        bool all_zero = true;
        for (double v : model.terms[r])
            if (v != 0) all_zero = false;
        if (all_zero) continue;
        os << "  hamiltonian " << model.regions.region_names[r] << " {";
        for (double v : model.terms[r]) os << " " << format_double(v);
        os << " }\n";
    }
    os << "  beta { " << format_double(model.beta) << " }\n";
    os << "}\n";
    return os.str();
}

std::string serialize_beliefs(const FinitePoset& poset, const BeliefFamily& beliefs) {
    std::ostringstream os;
    for (int a = 0; a < poset.size(); ++a) {
        os << "beliefs " << poset.name(a) << " {";
        for (double v : beliefs[static_cast<std::size_t>(a)].p) os << " " << format_double(v);
        os << " }\n";
    }
    return os.str();
}

std::string digest_hex(const std::string& bytes) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

ReportWriter::ReportWriter(const std::string& command, const std::string& input_path,
                           const std::string& input_bytes) {
    body_ += "csm-report 0.1.0\n";
    body_ += "command: " + command + "\n";
    body_ += "input: " + input_path + "\n";
    body_ += "digest: " + digest_hex(input_bytes) + "\n";
}

void ReportWriter::kv(const std::string& key, const std::string& value) {
    body_ += key + ": " + value + "\n";
}
void ReportWriter::kv(const std::string& key, double value) { kv(key, format_double(value)); }
void ReportWriter::kv(const std::string& key, long long value) { kv(key, std::to_string(value)); }
void ReportWriter::kv(const std::string& key, bool value) { kv(key, std::string(value ? "true" : "false")); }
void ReportWriter::line(const std::string& text) { body_ += text + "\n"; }

void ReportWriter::family(const std::string& heading, const FinitePoset& poset,
                          const BeliefFamily& beliefs) {
    body_ += heading + "\n";
    for (int a = 0; a < poset.size(); ++a) {
        body_ += "  " + poset.name(a) + ":";
        for (double v : beliefs[static_cast<std::size_t>(a)].p) body_ += " " + format_double(v);
        body_ += "\n";
    }
}

}  // namespace csm
