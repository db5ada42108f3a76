// Command-line front end: loads specification / model files and dispatches
// to the solvers. Reports go to stdout (byte-stable for fixed inputs and
// seed); timing goes to stderr.

#include <CLI11.hpp>
#include <chrono>
#include <fstream>
#include <iostream>
#include <sstream>

#include "csm/errors.hpp"
#include "csm/gbp.hpp"
#include "csm/gibbs_exact.hpp"
#include "csm/oracle.hpp"
#include "csm/specfile.hpp"
#include "csm/tail_events.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitNotConverged = 2;
constexpr int kExitIo = 3;

std::string read_bytes(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw csm::IoError("cannot open file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

struct Input {
    std::string path;
    std::string bytes;
    csm::LoadedFile file;
};

Input open_input(const std::string& path) {
    Input in;
    in.path = path;
    in.bytes = read_bytes(path);
    in.file = csm::parse_document(in.bytes, path);
    return in;
}

const csm::ASpecification& require_spec(const Input& in) {
    if (in.file.kind != csm::LoadedFile::Kind::Spec || !in.file.spec)
        throw csm::ValidationError(in.path + ": this command needs a specification file");
    return *in.file.spec;
}

const csm::JointModel& require_model(const Input& in) {
    if (in.file.kind != csm::LoadedFile::Kind::Model || !in.file.model)
        throw csm::ValidationError(in.path + ": this command needs a model file");
    return *in.file.model;
}

int require_valid(const Input& in, csm::ReportWriter& report) {
    if (in.file.kind != csm::LoadedFile::Kind::Spec) return kExitOk;
    if (in.file.validation.ok()) return kExitOk;
    report.kv("valid", false);
    for (const auto& issue : in.file.validation.issues)
        report.line("issue: [" + issue.code + "] " + issue.detail);
    std::cout << report.str();
    return kExitValidation;
}

csm::HamiltonianFamily hamiltonians_for(const Input& in) {
    if (in.file.kind == csm::LoadedFile::Kind::Model) return csm::region_energies(*in.file.model);
    if (in.file.hamiltonians) return *in.file.hamiltonians;
    return csm::zero_hamiltonians(in.file.spec->spaces());
}

void report_criticality(csm::ReportWriter& report, const csm::CriticalityReport& crit) {
    report.kv("criticality-residual", crit.projected_residual);
    report.kv("criticality-residual-mobius", crit.mobius_residual);
    report.kv("criticality-route-agreement", crit.route_agreement);
    report.kv("feasibility-residual", crit.feasibility_residual);
}

int cmd_validate(const std::string& path) {
    Input in = open_input(path);
    csm::ReportWriter report("validate", in.path, in.bytes);
    if (in.file.kind == csm::LoadedFile::Kind::Model) {
        report.kv("kind", std::string("model"));
        report.kv("valid", true);
        report.kv("regions", static_cast<long long>(in.file.model->regions.region_names.size()));
        std::cout << report.str();
        return kExitOk;
    }
    report.kv("kind", std::string("spec"));
    report.kv("valid", in.file.validation.ok());
    report.kv("issues", static_cast<long long>(in.file.validation.issues.size()));
    for (const auto& issue : in.file.validation.issues)
        report.line("issue: [" + issue.code + "] " + issue.detail);
    for (const auto& warning : in.file.validation.warnings) report.line("warning: " + warning);
    report.kv("strictly-positive", csm::strict_positivity(*in.file.spec));
    std::cout << report.str();
    return in.file.validation.ok() ? kExitOk : kExitValidation;
}

int cmd_gibbs(const std::string& path) {
    Input in = open_input(path);
    csm::ReportWriter report("gibbs", in.path, in.bytes);
    if (int rc = require_valid(in, report); rc != kExitOk) return rc;
    const auto& spec = require_spec(in);
    csm::GibbsSetReport gibbs = csm::solve_gibbs(spec);
    report.kv("feasible", gibbs.feasible);
    report.kv("affine-dimension", static_cast<long long>(gibbs.affine_dimension));
    report.kv("vertices", static_cast<long long>(gibbs.vertices.size()));
    for (std::size_t i = 0; i < gibbs.vertices.size(); ++i)
        report.family("vertex " + std::to_string(i) + ":", spec.poset(), gibbs.vertices[i]);
    if (gibbs.certificate) {
        report.kv("certificate-verified", gibbs.certificate->verified);
        std::string y = "farkas:";
        for (const auto& v : gibbs.certificate->y) y += " " + csm::to_string(v);
        report.line(y);
    }
    for (const auto& w : gibbs.warnings) report.line("warning: " + w);
    if (in.file.decomposition) {
        auto check = csm::projective_classification_check(spec, *in.file.decomposition);
        report.kv("projective-classification", check.ok);
        report.kv("projective-detail", check.detail);
    }
    std::cout << report.str();
    return kExitOk;
}

int cmd_extreme(const std::string& path, const std::string& section_path, int vertex) {
    Input in = open_input(path);
    csm::ReportWriter report("extreme", in.path, in.bytes);
    if (int rc = require_valid(in, report); rc != kExitOk) return rc;
    const auto& spec = require_spec(in);
    csm::BeliefFamily section;
    if (!section_path.empty()) {
        section = csm::load_beliefs(section_path, spec.poset(), spec.spaces());
    } else {
        auto gibbs = csm::solve_gibbs(spec);
        if (vertex < 0 || vertex >= static_cast<int>(gibbs.vertices.size()))
            throw csm::ValidationError("vertex index out of range");
        section = gibbs.vertices[static_cast<std::size_t>(vertex)];
        report.kv("vertex", static_cast<long long>(vertex));
    }
    auto verdict = csm::zero_one_extremality_test(spec, section);
    report.kv("extreme", verdict.extreme);
    report.kv("heuristic", verdict.heuristic);
    if (!verdict.extreme && verdict.witness) {
        report.kv("witness-weight", verdict.weight);
        std::string w = "witness:";
        for (int a = 0; a < spec.poset().size(); ++a) {
            w += " " + spec.poset().name(a) + "={";
            bool first = true;
            for (int o = 0; o < spec.space_size(a); ++o)
                if (verdict.witness->in[static_cast<std::size_t>(a)][static_cast<std::size_t>(o)]) {
                    if (!first) w += ",";
                    w += spec.space(a).outcomes[static_cast<std::size_t>(o)];
                    first = false;
                }
            w += "}";
        }
        report.line(w);
        report.family("component-a:", spec.poset(), *verdict.component_a);
        report.family("component-b:", spec.poset(), *verdict.component_b);
    }
    std::cout << report.str();
    return kExitOk;
}

int cmd_bethe(const std::string& path, const std::string& beliefs_path) {
    Input in = open_input(path);
    csm::ReportWriter report("bethe", in.path, in.bytes);
    if (int rc = require_valid(in, report); rc != kExitOk) return rc;
    csm::HamiltonianFamily h = hamiltonians_for(in);
    const csm::FinitePoset& poset = in.file.kind == csm::LoadedFile::Kind::Spec
                                        ? in.file.spec->poset()
                                        : in.file.model->regions.poset;
    const auto& spaces = in.file.kind == csm::LoadedFile::Kind::Spec ? in.file.spec->spaces()
                                                                     : in.file.model->regions.spaces;
    csm::BeliefFamily q = csm::load_beliefs(beliefs_path, poset, spaces);
    csm::MobiusTable table(poset);
    auto c = csm::counting_coefficients(poset, table);
    report.kv("f-bethe", csm::generalized_bethe(q, h, c));
    report.kv("gb-entropy", csm::gb_entropy(q, c));
    auto fe = csm::fe_vector(q, h);
    for (int a = 0; a < poset.size(); ++a)
        report.kv("fe " + poset.name(a), fe[static_cast<std::size_t>(a)]);
    if (in.file.kind == csm::LoadedFile::Kind::Spec) {
        auto fp = csm::fixed_point_verify(*in.file.spec, h, q);
        report.kv("section-residual", fp.section_residual);
        report_criticality(report, fp.criticality);
    } else {
        auto fp = csm::fixed_point_verify(csm::skeleton_of(in.file.model->regions), h, q);
        report.kv("marginal-residual", fp.section_residual);
        report_criticality(report, fp.criticality);
    }
    std::cout << report.str();
    return kExitOk;
}

int cmd_gbp(const std::string& path, const csm::GbpOptions& opts) {
    Input in = open_input(path);
    csm::ReportWriter report("gbp", in.path, in.bytes);
    if (int rc = require_valid(in, report); rc != kExitOk) return rc;
    csm::HamiltonianFamily h = hamiltonians_for(in);
    csm::GbpResult result;
    const csm::FinitePoset* poset = nullptr;
    if (in.file.kind == csm::LoadedFile::Kind::Spec) {
        result = csm::run_gbp(*in.file.spec, h, opts);
        poset = &in.file.spec->poset();
    } else {
        result = csm::run_gbp(in.file.model->regions, h, opts);
        poset = &in.file.model->regions.poset;
    }
    report.kv("converged", result.converged);
    report.kv("iterations", static_cast<long long>(result.iterations));
    report.kv("final-change", result.final_change);
    report.kv("fixed-point-residual", result.fixed_point_residual);
    report.kv("marginal-residual", result.marginal_residual);
    if (in.file.kind == csm::LoadedFile::Kind::Spec) report.kv("section-residual", result.section_residual);
    report.kv("f-bethe", result.f_bethe);
    report_criticality(report, result.criticality);
    report.family("beliefs:", *poset, result.beliefs);
    std::cout << report.str();
    return result.converged ? kExitOk : kExitNotConverged;
}

int cmd_mobius(const std::string& path) {
    Input in = open_input(path);
    csm::ReportWriter report("mobius", in.path, in.bytes);
    const csm::FinitePoset& poset = in.file.kind == csm::LoadedFile::Kind::Spec
                                        ? in.file.spec->poset()
                                        : in.file.model->regions.poset;
    csm::MobiusTable table(poset);
    report.kv("elements", static_cast<long long>(poset.size()));
    for (int a = 0; a < poset.size(); ++a)
        for (int b = 0; b < poset.size(); ++b)
            if (poset.leq(b, a) && table.mu(a, b) != 0)
                report.line("mu " + poset.name(a) + " " + poset.name(b) + ": " + std::to_string(table.mu(a, b)));
    auto c = csm::counting_coefficients(poset, table);
    for (int a = 0; a < poset.size(); ++a)
        report.line("c " + poset.name(a) + ": " + std::to_string(c[static_cast<std::size_t>(a)]));
    std::cout << report.str();
    return kExitOk;
}

int cmd_oracle(const std::string& path, const std::string& which, int resolution) {
    Input in = open_input(path);
    csm::ReportWriter report("oracle", in.path, in.bytes);
    if (which == "logz") {
        const auto& model = require_model(in);
        report.kv("minus-log-z", csm::exact_log_partition(model));
    } else if (which == "marginals") {
        const auto& model = require_model(in);
        report.family("marginals:", model.regions.poset, csm::exact_marginals(model));
    } else if (which == "sections") {
        if (int rc = require_valid(in, report); rc != kExitOk) return rc;
        const auto& spec = require_spec(in);
        auto sections = csm::brute_force_sections(spec, resolution);
        report.kv("resolution", static_cast<long long>(resolution));
        report.kv("grid-sections", static_cast<long long>(sections.size()));
    } else {
        throw csm::ValidationError("unknown oracle task '" + which + "' (logz | marginals | sections)");
    }
    std::cout << report.str();
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"compositional statistical mechanics toolkit"};
    app.require_subcommand(1);

    std::string path, section_path, beliefs_path, which = "logz", variant = "pushdown", trace;
    int vertex = -1, resolution = 64;
    csm::GbpOptions gbp_opts;

    auto* validate = app.add_subcommand("validate", "check a specification file");
    validate->add_option("file", path)->required();

    auto* gibbs = app.add_subcommand("gibbs", "exact Gibbs polytope: feasibility, dimension, vertices");
    gibbs->add_option("file", path)->required();

    auto* extreme = app.add_subcommand("extreme", "zero-one extremality test for a section");
    extreme->add_option("file", path)->required();
    extreme->add_option("--section", section_path, "beliefs file with the section to test");
    extreme->add_option("--vertex", vertex, "test this vertex of the Gibbs polytope instead");

    auto* bethe = app.add_subcommand("bethe", "generalized Bethe free energy of a belief family");
    bethe->add_option("file", path)->required();
    bethe->add_option("--beliefs", beliefs_path)->required();

    auto* gbp = app.add_subcommand("gbp", "run generalized belief propagation");
    gbp->add_option("file", path)->required();
    gbp->add_option("--max-iters", gbp_opts.max_iters);
    gbp->add_option("--tol", gbp_opts.tol);
    gbp->add_option("--damping", gbp_opts.damping);
    gbp->add_option("--seed", gbp_opts.seed);
    gbp->add_flag("--perturb", gbp_opts.perturb_init, "log-normal message initialization");
    gbp->add_option("--variant", variant, "pushdown | literal-f");
    gbp->add_option("--trace", trace, "per-iteration CSV path");

    auto* mobius = app.add_subcommand("mobius", "Moebius coefficients and counting numbers");
    mobius->add_option("file", path)->required();

    auto* oracle = app.add_subcommand("oracle", "brute-force reference computations");
    oracle->add_option("file", path)->required();
    oracle->add_option("--which", which, "logz | marginals | sections");
    oracle->add_option("--resolution", resolution);

    CLI11_PARSE(app, argc, argv);

    const auto started = std::chrono::steady_clock::now();
    int rc = kExitOk;
    try {
        if (validate->parsed()) rc = cmd_validate(path);
        if (gibbs->parsed()) rc = cmd_gibbs(path);
        if (extreme->parsed()) rc = cmd_extreme(path, section_path, vertex);
        if (bethe->parsed()) rc = cmd_bethe(path, beliefs_path);
        if (gbp->parsed()) {
            if (variant == "literal-f")
                gbp_opts.variant = csm::GbpVariant::LiteralF;
            else if (variant != "pushdown")
                throw csm::ValidationError("unknown variant '" + variant + "'");
            gbp_opts.trace_path = trace;
            rc = cmd_gbp(path, gbp_opts);
        }
        if (mobius->parsed()) rc = cmd_mobius(path);
        if (oracle->parsed()) rc = cmd_oracle(path, which, resolution);
    } catch (const csm::ParseError& e) {
        std::cerr << "parse error: " << e.what() << "\n";
        return kExitIo;
    } catch (const csm::IoError& e) {
        std::cerr << "io error: " << e.what() << "\n";
        return kExitIo;
    } catch (const csm::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitValidation;
    }
    const auto elapsed =
        std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - started);
    std::cerr << "walltime-ms: " << elapsed.count() << "\n";
    return rc;
}
