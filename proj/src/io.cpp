#include "qembed/io.hpp"

#include "qembed/errors.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace qembed::io {

std::string format_real(double v) {
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    if (std::isnan(v)) return "nan";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

double parse_real(const Json& j) {
    if (j.is_number()) return j.get<double>();
    if (!j.is_string()) throw DomainError("expected a real encoded as a decimal string");
    const std::string s = j.get<std::string>();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size()) {
        throw DomainError("malformed real '" + s + "'");
    }
    return v;
}

namespace {

double field(const Json& j, const char* name) {
    if (!j.contains(name)) throw DomainError(std::string("missing field '") + name + "'");
    return parse_real(j.at(name));
}

}  // namespace

Json to_json(const PointInteraction& pi) {
    Json j;
    j["c"] = format_real(pi.c);
    j["beta"] = format_real(pi.beta);
    j["gamma"] = format_real(pi.gamma);
    return j;
}

Json to_json(const SingularExample& ex) {
    Json j;
    j["kind"] = "singular_example";
    j["amplitude"] = format_real(ex.amplitude);
    j["interfaces"] = Json::array({to_json(ex.interfaces[0]), to_json(ex.interfaces[1])});
    j["lambda"] = format_real(ex.lambda);
    j["parity"] = to_string(ex.parity);
    return j;
}

Json to_json(const EmbeddedPotentialSpec& spec) {
    Json j;
    j["kind"] = "embedded_potential";
    j["k0"] = format_real(spec.k0);
    j["a"] = format_real(spec.a);
    j["b"] = format_real(spec.b);
    j["A"] = format_real(spec.A);
    j["B"] = format_real(spec.B);
    j["zeta"] = format_real(spec.zeta);
    Json pieces = Json::array();
    for (const auto& p : spec.pieces.pieces()) {
        Json piece;
        piece["left"] = format_real(p.left);
        piece["right"] = format_real(p.right);
        piece["value"] = format_real(p.value);
        pieces.push_back(piece);
    }
    j["pieces"] = pieces;
    j["even"] = spec.even;
    return j;
}

Json to_json(const SpectralReport& rep) {
    Json j;
    j["kind"] = "spectral_report";
    Json values = Json::array();
    for (double v : rep.eigenvalues) values.push_back(format_real(v));
    j["eigenvalues"] = values;
    j["target"] = format_real(rep.target);
    j["nearest"] = format_real(rep.nearest);
    j["nearest_index"] = rep.nearest_index;
    j["gap"] = format_real(rep.gap);
    j["ipr"] = format_real(rep.ipr);
    j["median_ipr"] = format_real(rep.median_ipr);
    j["localization_threshold"] = format_real(rep.localization_threshold);
    j["continuum_below"] = rep.continuum_below;
    j["continuum_above"] = rep.continuum_above;
    j["decay_rate"] = format_real(rep.decay_rate);
    j["decay_fit"] = format_real(rep.decay_fit);
    j["continuum_close"] = rep.continuum_close;
    j["verdict"] = to_string(rep.verdict);
    return j;
}

SingularExample singular_from_json(const Json& j) {
    if (document_kind(j) != "singular_example") throw DomainError("not a singular_example document");
    SingularExample ex;
    ex.amplitude = field(j, "amplitude");
    ex.lambda = field(j, "lambda");
    ex.parity = parity_from_string(j.at("parity").get<std::string>());
    const Json& itf = j.at("interfaces");
    if (!itf.is_array() || itf.size() != 2) throw DomainError("interfaces must hold two entries");
    for (std::size_t i = 0; i < 2; ++i) {
        ex.interfaces[i] = {field(itf[i], "c"), field(itf[i], "beta"), field(itf[i], "gamma")};
    }
    if (!(ex.interfaces[1].c > 0.0)) throw DomainError("second interface must sit at c > 0");
    return ex;
}

EmbeddedPotentialSpec embedded_spec_from_json(const Json& j) {
    if (document_kind(j) != "embedded_potential") {
        throw DomainError("not an embedded_potential document");
    }
    EmbeddedPotentialSpec spec = make_embedded_spec(field(j, "k0"), field(j, "a"), field(j, "b"),
                                                    field(j, "A"), field(j, "B"), field(j, "zeta"));
    // Stale pieces (parameters edited after emission) are a consistency failure.
    if (j.contains("pieces")) {
        const Json& pieces = j.at("pieces");
        const auto& expected = spec.pieces.pieces();
        if (!pieces.is_array() || pieces.size() != expected.size()) {
            throw ConsistencyError("pieces do not match the (a, b, A, B, k0) parameters");
        }
        for (std::size_t i = 0; i < expected.size(); ++i) {
            if (field(pieces[i], "left") != expected[i].left ||
                field(pieces[i], "right") != expected[i].right ||
                field(pieces[i], "value") != expected[i].value) {
                throw ConsistencyError("piece " + std::to_string(i) +
                                  " does not match the (a, b, A, B, k0) parameters");
            }
        }
    }
    return spec;
}

std::string document_kind(const Json& j) {
    if (!j.is_object() || !j.contains("kind") || !j.at("kind").is_string()) {
        throw DomainError("document has no 'kind' field");
    }
    return j.at("kind").get<std::string>();
}

void write_eigenfunction_csv(std::ostream& os, const EigenfunctionSample& s) {
    os << "# lambda=" << format_real(s.lambda) << '\n';
    for (std::size_t i = 0; i < s.grid.size(); ++i) {
        os << format_real(s.grid[i]) << ',' << format_real(s.values[i]) << '\n';
    }
}

EigenfunctionSample read_eigenfunction_csv(std::istream& is) {
    EigenfunctionSample s;
    std::string line;
    if (!std::getline(is, line) || line.rfind("# lambda=", 0) != 0) {
        throw DomainError("eigenfunction CSV must start with '# lambda=<value>'");
    }
    s.lambda = parse_real(Json(line.substr(9)));
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        const auto comma = line.find(',');
        if (comma == std::string::npos) throw DomainError("malformed CSV row '" + line + "'");
        s.grid.push_back(parse_real(Json(line.substr(0, comma))));
        s.values.push_back(parse_real(Json(line.substr(comma + 1))));
    }
    return s;
}

void write_column_csv(std::ostream& os, const std::vector<double>& values) {
    for (double v : values) os << format_real(v) << '\n';
}

Json read_json_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DomainError("cannot open " + path.string());
    try {
        return Json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw DomainError("malformed JSON in " + path.string() + ": " + e.what());
    }
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DomainError("cannot write " + path.string());
    out << text;
    if (!out) throw DomainError("write failed for " + path.string());
}

void write_json_file(const std::filesystem::path& path, const Json& j) {
    write_text_file(path, j.dump(2) + "\n");
}

}  // namespace qembed::io
