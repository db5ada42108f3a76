#pragma once

#include <optional>
#include <string>
#include <vector>

#include "csm/free_energy.hpp"
#include "csm/oracle.hpp"
#include "csm/spec_model.hpp"

namespace csm {

/// A parsed input file: either a specification document (poset, spaces,
/// gmap / fkernel legs, optional hamiltonians and decomposition dims) or a
/// joint region model (variables, regions, energy terms). Validation runs
/// on every specification load.
struct LoadedFile {
    enum class Kind { Spec, Model };
    Kind kind = Kind::Spec;
    std::optional<ASpecification> spec;
    std::optional<HamiltonianFamily> hamiltonians;          // spec files
    std::optional<ProjectiveDecomposition> decomposition;  // dims only
    std::optional<JointModel> model;
    ValidationReport validation;
};

LoadedFile load_file(const std::string& path);
LoadedFile parse_document(const std::string& text, const std::string& origin = "<string>");

/// Belief / section files: one `beliefs <element> { ... }` block per poset
/// element ("section" is accepted as a synonym).
BeliefFamily load_beliefs(const std::string& path, const FinitePoset& poset,
                          const std::vector<FiniteSpace>& spaces);
BeliefFamily parse_beliefs(const std::string& text, const FinitePoset& poset,
                           const std::vector<FiniteSpace>& spaces,
                           const std::string& origin = "<string>");

std::string serialize_spec(const ASpecification& spec,
                           const HamiltonianFamily* hamiltonians = nullptr,
                           const ProjectiveDecomposition* decomposition = nullptr);
std::string serialize_model(const JointModel& model);
std::string serialize_beliefs(const FinitePoset& poset, const BeliefFamily& beliefs);

/// Canonical shortest-round-trip rendering used by every report and
/// serializer, so identical inputs give byte-identical outputs.
std::string format_double(double x);

/// FNV-1a 64 of the raw file bytes, as 16 hex digits.
std::string digest_hex(const std::string& bytes);

/// Line-oriented report builder shared by the CLI subcommands.
class ReportWriter {
public:
    ReportWriter(const std::string& command, const std::string& input_path,
                 const std::string& input_bytes);
    void kv(const std::string& key, const std::string& value);
    void kv(const std::string& key, double value);
    void kv(const std::string& key, long long value);
    void kv(const std::string& key, bool value);
    void line(const std::string& text);
    void family(const std::string& heading, const FinitePoset& poset, const BeliefFamily& beliefs);
    std::string str() const { return body_; }

private:
    std::string body_;
};

}  // namespace csm
