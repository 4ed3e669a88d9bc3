#pragma once

#include "fractal/family.hpp"
#include "fractal/network.hpp"
#include "fractal/structure.hpp"

#include <json.hpp>

#include <iosfwd>
#include <optional>
#include <string>

namespace fractal {

/// A parsed structure config: the structure, an optional family template and
/// an optional explicit form on F^0.
struct StructureConfig {
    SelfSimilarStructure structure;
    std::optional<OneParamFamily> family;
    std::optional<ConductanceNetwork<Rational>> form;
};

/// Parses and validates a config document. Throws ConfigError.
StructureConfig parse_config(const nlohmann::json& doc);
StructureConfig load_config(const std::string& path);

/// Serialises a structure (and optional form) in the config format.
nlohmann::json structure_to_json(const SelfSimilarStructure& s,
                                 const std::optional<ConductanceNetwork<Rational>>& form = std::nullopt);

inline constexpr const char* kCsvHeader = "# fractal-forms v1";

/// Rows x,y,conductance,class for every positive edge.
template <class Scalar>
void write_network_csv(std::ostream& out, const ConductanceNetwork<Scalar>& net);

void write_spectrum_csv(std::ostream& out, const Vector<double>& eigenvalues);

}  // namespace fractal
