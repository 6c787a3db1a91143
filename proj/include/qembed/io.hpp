#pragma once

// JSON documents and CSV files exchanged by the command-line tool.
// Reals in JSON are decimal strings with 17 significant digits so that a
// document read back reproduces every double exactly.

#include "qembed/construction.hpp"
#include "qembed/spectral_verifier.hpp"

#include <json.hpp>

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace qembed::io {

using Json = nlohmann::ordered_json;

std::string format_real(double v);
// Accepts a decimal string ("inf" and "-inf" included) or a JSON number.
double parse_real(const Json& j);

Json to_json(const PointInteraction& pi);
Json to_json(const SingularExample& ex);
Json to_json(const EmbeddedPotentialSpec& spec);
Json to_json(const SpectralReport& rep);

SingularExample singular_from_json(const Json& j);
EmbeddedPotentialSpec embedded_spec_from_json(const Json& j);

// `kind` field of a document: "singular_example", "embedded_potential",
// "schrodinger_square".
std::string document_kind(const Json& j);

// Two columns x,value after the header line "# lambda=<value>".
void write_eigenfunction_csv(std::ostream& os, const EigenfunctionSample& s);
EigenfunctionSample read_eigenfunction_csv(std::istream& is);

void write_column_csv(std::ostream& os, const std::vector<double>& values);

Json read_json_file(const std::filesystem::path& path);
void write_json_file(const std::filesystem::path& path, const Json& j);
void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace qembed::io
