#pragma once

#include "sublin/centering.hpp"
#include "sublin/credal.hpp"
#include "sublin/dependence.hpp"
#include "sublin/product.hpp"

#include <json.hpp>

#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace sublin {

using json = nlohmann::json;

/// Raised on unreadable or malformed input files; the message names the path.
class LoadError : public ModelError {
public:
    using ModelError::ModelError;
};

/// A model file: the credal set plus the variable attached to its atoms.
struct ModelFile {
    SublinearModel model;
    RandomVariable values;
};

/// A product file: {"marginal": <model file or inline model>, "n": int, "growth": q (optional)}.
struct ProductFile {
    ModelFile marginal;
    std::size_t n;
    double growth;
    ProductModel product;
};

inline json read_json(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw LoadError("cannot open " + path.string());
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw LoadError(path.string() + ": " + e.what());
    }
}

/**
 * {"atoms": [...], "generators": [[...], ...], "values": [...]}.
 * Atoms may be strings or numbers; "values" defaults to the numeric atom
 * labels. Rows must sum to 1 within 1e-9 and are renormalized.
 */
inline ModelFile parse_model(const json& j, const std::string& where = "model") {
    try {
        if (!j.is_object() || !j.contains("atoms") || !j.contains("generators"))
            throw LoadError(where + ": expected \"atoms\" and \"generators\"");
        std::vector<std::string> labels;
        for (const auto& a : j.at("atoms")) labels.push_back(a.is_string() ? a.get<std::string>() : a.dump());
        auto space = make_space(labels);
        std::vector<Distribution> rows;
        for (std::size_t g = 0; g < j.at("generators").size(); ++g) {
            const auto& row = j.at("generators")[g];
            if (row.size() != labels.size())
                throw LoadError(where + ": generator row " + std::to_string(g) + " has " + std::to_string(row.size()) +
                                " entries, expected " + std::to_string(labels.size()));
            rows.push_back(row.get<Distribution>());
        }
        auto model = SublinearModel(CredalSet::normalized(space, std::move(rows)));
        auto values = j.contains("values") ? RandomVariable(space, j.at("values").get<std::vector<double>>())
                                           : atom_values(space);
        return {std::move(model), std::move(values)};
    } catch (const LoadError&) {
        throw;
    } catch (const std::exception& e) {
        throw LoadError(where + ": " + e.what());
    }
}

inline ModelFile load_model(const std::filesystem::path& path) { return parse_model(read_json(path), path.string()); }

inline bool is_product_json(const json& j) { return j.is_object() && j.contains("marginal"); }

inline ProductFile parse_product(const json& j, const std::filesystem::path& base_dir, const std::string& where) {
    try {
        const auto& m = j.at("marginal");
        ModelFile marginal = m.is_string() ? load_model(base_dir / m.get<std::string>()) : parse_model(m, where);
        auto n = j.at("n").get<std::size_t>();
        double growth = j.value("growth", 0.0);
        auto product = growth == 0.0 ? build_product_model(marginal.model, n, marginal.values)
                                     : build_growing_product_model(marginal.model, n, marginal.values, growth);
        return {std::move(marginal), n, growth, std::move(product)};
    } catch (const LoadError&) {
        throw;
    } catch (const std::exception& e) {
        throw LoadError(where + ": " + e.what());
    }
}

inline ProductFile load_product(const std::filesystem::path& path) {
    return parse_product(read_json(path), path.parent_path(), path.string());
}

/// Locale-independent shortest form with at most 12 significant digits.
inline std::string format_number(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    if (v == 0.0) v = 0.0;  // drop the sign of -0
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 12);
    return std::string(buf, res.ptr);
}

/// Rectangular table with a fixed header, rendered as CSV.
class CsvTable {
public:
    explicit CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}

    class Row {
    public:
        Row& operator<<(double v) { return cell(format_number(v)); }
        Row& operator<<(std::size_t v) { return cell(std::to_string(v)); }
        Row& operator<<(int v) { return cell(std::to_string(v)); }
        Row& operator<<(bool v) { return cell(v ? "true" : "false"); }
        Row& operator<<(const std::string& v) { return cell(v); }
        Row& operator<<(const char* v) { return cell(v); }

    private:
        friend class CsvTable;
        explicit Row(std::vector<std::string>& cells) : cells_(cells) {}
        Row& cell(std::string s) {
            cells_.push_back(std::move(s));
            return *this;
        }
        std::vector<std::string>& cells_;
    };

    Row row() {
        rows_.emplace_back();
        return Row(rows_.back());
    }

    const std::vector<std::string>& header() const noexcept { return header_; }
    std::size_t size() const noexcept { return rows_.size(); }

    std::string str() const {
        std::ostringstream out;
        auto line = [&](const std::vector<std::string>& cells) {
            for (std::size_t i = 0; i < cells.size(); ++i) out << (i ? "," : "") << quote(cells[i]);
            out << '\n';
        };
        line(header_);
        for (const auto& r : rows_) {
            if (r.size() != header_.size()) throw std::logic_error("CsvTable: row width does not match header");
            line(r);
        }
        return out.str();
    }

private:
    static std::string quote(const std::string& s) {
        if (s.find_first_of(",\"\n") == std::string::npos) return s;
        std::string q = "\"";
        for (char c : s) q += c == '"' ? std::string("\"\"") : std::string(1, c);
        return q + "\"";
    }

    std::vector<std::string> header_;
    std::vector<std::vector<std::string>> rows_;
};

/// Writes via a temporary file in the same directory, then renames over the target.
inline void write_atomic(const std::filesystem::path& path, const std::string& content) {
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw LoadError("cannot write " + tmp.string());
        out << content;
        out.flush();
        if (!out) throw LoadError("cannot write " + tmp.string());
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        std::filesystem::remove(tmp, ec);
        throw LoadError("cannot rename into " + path.string());
    }
}

/// JSON number that survives NaN and infinities (as null).
inline json number(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

inline json to_json(const CenteringInterval& d) { return {{"lo", number(d.lo)}, {"hi", number(d.hi)}}; }

inline json to_json(const CenteringSequence& seq) {
    json intervals = json::array();
    for (const auto& d : seq.intervals) intervals.push_back(to_json(d));
    return {{"lambdas", seq.lambdas}, {"intervals", intervals}, {"residuals", seq.residuals}};
}

inline json to_json(const UncorrelatedCertificate& c) {
    json j{{"holds", c.holds}};
    json vf = json::array(), pf = json::array();
    for (const auto& v : c.vertex_failures) vf.push_back({{"generator", v.generator}, {"covariance", v.covariance}});
    for (const auto& p : c.pair_failures)
        pf.push_back({{"i", p.i}, {"j", p.j}, {"delta_x", p.delta_xi}, {"delta_y", p.delta_eta}});
    j["vertex_failures"] = vf;
    j["pair_failures"] = pf;
    if (c.witness) j["witness"] = {{"weights", c.witness->weights}, {"covariance", c.witness->covariance}};
    return j;
}

}  // namespace sublin
