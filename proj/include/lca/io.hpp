#pragma once

// JSON and CSV serialization of problems, trajectories and reports.
//
// Problem files:
//   {
//     "format": "lca-problem", "version": 1,
//     "m": 256, "n": 512, "lambda": 0.025,
//     "y": [...],
//     "dictionary": {"kind": "canonical_sinusoid", "m": 256}
//                 | {"kind": "dense", "rows": [[...], ...]},   // row-major
//     "ground_truth": {"a0": [...], "support": [...], "noise_std": 0.0062}   // optional
//   }

#include "lca/diagnostics.hpp"
#include "lca/dynamics.hpp"
#include "lca/model.hpp"
#include "lca/version.hpp"

#include <json.hpp>

#include <cstdio>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

namespace lca {

using Json = nlohmann::json;

/// Malformed or inconsistent input file; the message names the field.
class FormatError : public Error {
public:
    using Error::Error;
};

/// Decimal with 17 significant digits; round-trips every double.
inline std::string format_double(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

inline Json to_json(const Vector& v) {
    Json arr = Json::array();
    for (Index i = 0; i < v.size(); ++i) arr.push_back(v[i]);
    return arr;
}

inline Json to_json(const IndexSet& s) {
    Json arr = Json::array();
    for (Index i : s) arr.push_back(i);
    return arr;
}

namespace detail {

inline const Json& field(const Json& obj, const std::string& key, const std::string& path) {
    if (!obj.is_object()) throw FormatError(path + ": expected an object");
    auto it = obj.find(key);
    if (it == obj.end()) throw FormatError(path + "." + key + ": missing field");
    return *it;
}

inline double number(const Json& j, const std::string& path) {
    if (!j.is_number()) throw FormatError(path + ": expected a number");
    return j.get<double>();
}

inline Index integer(const Json& j, const std::string& path) {
    if (!j.is_number_integer()) throw FormatError(path + ": expected an integer");
    return j.get<Index>();
}

inline Vector vector(const Json& j, const std::string& path) {
    if (!j.is_array()) throw FormatError(path + ": expected an array of numbers");
    Vector v(static_cast<Index>(j.size()));
    for (std::size_t i = 0; i < j.size(); ++i) v[static_cast<Index>(i)] = number(j[i], path + "[" + std::to_string(i) + "]");
    return v;
}

}  // namespace detail

struct ProblemFile {
    Problem problem;
    std::optional<GroundTruth> truth;
};

inline Json problem_to_json(const Problem& problem, const std::optional<GroundTruth>& truth = std::nullopt) {
    Json j;
    j["format"] = "lca-problem";
    j["version"] = 1;
    j["m"] = problem.m();
    j["n"] = problem.n();
    j["lambda"] = problem.lambda();
    j["y"] = to_json(problem.y());
    if (problem.dictionary().kind() == DictionaryKind::CanonicalSinusoid) {
        j["dictionary"] = {{"kind", "canonical_sinusoid"}, {"m", problem.m()}};
    } else {
        Json rows = Json::array();
        for (Index i = 0; i < problem.m(); ++i) rows.push_back(to_json(Vector(problem.phi().row(i).transpose())));
        j["dictionary"] = {{"kind", "dense"}, {"rows", std::move(rows)}};
    }
    if (truth) j["ground_truth"] = {{"a0", to_json(truth->a0)}, {"support", to_json(truth->support)}, {"noise_std", truth->noise_std}};
    return j;
}

inline ProblemFile problem_from_json(const Json& j) {
    using detail::field;
    if (!j.is_object()) throw FormatError("problem: expected a JSON object");
    if (auto it = j.find("format"); it != j.end() && *it != "lca-problem")
        throw FormatError("problem.format: expected \"lca-problem\"");
    const Index m = detail::integer(field(j, "m", "problem"), "problem.m");
    const Index n = detail::integer(field(j, "n", "problem"), "problem.n");
    if (m < 1 || n < 1) throw FormatError("problem.m/n: dimensions must be positive");
    const double lambda = detail::number(field(j, "lambda", "problem"), "problem.lambda");
    if (!(lambda > 0.0)) throw FormatError("problem.lambda: must be positive");
    Vector y = detail::vector(field(j, "y", "problem"), "problem.y");
    if (y.size() != m) throw FormatError("problem.y: length " + std::to_string(y.size()) + " does not match m=" + std::to_string(m));

    const Json& dj = field(j, "dictionary", "problem");
    const Json& kind = field(dj, "kind", "problem.dictionary");
    std::optional<Dictionary> dict;
    if (kind == "canonical_sinusoid") {
        const Index dm = detail::integer(field(dj, "m", "problem.dictionary"), "problem.dictionary.m");
        if (dm != m || n != 2 * m) throw FormatError("problem.dictionary.m: canonical_sinusoid needs m matching and n = 2m");
        dict = build_canonical_sinusoid_dictionary(m);
    } else if (kind == "dense") {
        const Json& rows = field(dj, "rows", "problem.dictionary");
        if (!rows.is_array() || static_cast<Index>(rows.size()) != m)
            throw FormatError("problem.dictionary.rows: expected " + std::to_string(m) + " rows");
        Matrix phi(m, n);
        for (Index i = 0; i < m; ++i) {
            const std::string path = "problem.dictionary.rows[" + std::to_string(i) + "]";
            Vector row = detail::vector(rows[static_cast<std::size_t>(i)], path);
            if (row.size() != n) throw FormatError(path + ": expected " + std::to_string(n) + " entries");
            phi.row(i) = row.transpose();
        }
        try {
            dict = normalize_columns(phi);
        } catch (const ZeroColumn& e) {
            throw FormatError("problem.dictionary.rows: column " + std::to_string(e.column()) + " is zero");
        }
    } else {
        throw FormatError("problem.dictionary.kind: expected \"canonical_sinusoid\" or \"dense\"");
    }

    ProblemFile out{Problem(std::move(*dict), std::move(y), lambda), std::nullopt};
    if (auto it = j.find("ground_truth"); it != j.end()) {
        GroundTruth gt;
        gt.a0 = detail::vector(field(*it, "a0", "problem.ground_truth"), "problem.ground_truth.a0");
        if (gt.a0.size() != n) throw FormatError("problem.ground_truth.a0: length must equal n");
        const Json& sup = field(*it, "support", "problem.ground_truth");
        if (!sup.is_array()) throw FormatError("problem.ground_truth.support: expected an array of indices");
        for (std::size_t k = 0; k < sup.size(); ++k)
            gt.support.push_back(detail::integer(sup[k], "problem.ground_truth.support[" + std::to_string(k) + "]"));
        if (auto ns = it->find("noise_std"); ns != it->end()) gt.noise_std = detail::number(*ns, "problem.ground_truth.noise_std");
        out.truth = std::move(gt);
    }
    return out;
}

inline ProblemFile read_problem_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw FormatError(path + ": cannot open");
    Json j;
    try {
        in >> j;
    } catch (const Json::parse_error& e) {
        throw FormatError(path + ": invalid JSON (" + e.what() + ")");
    }
    return problem_from_json(j);
}

// ---------------------------------------------------------------------------

inline Json trajectory_to_json(const Trajectory& traj, bool include_states = true) {
    Json j;
    j["converged"] = traj.converged;
    j["steps"] = traj.steps;
    j["final_residual"] = traj.final_residual;
    j["final_time"] = traj.final_state.t;
    j["initial_active"] = to_json(traj.initial_active);
    j["final_active"] = to_json(traj.final_state.active);
    Json samples = Json::array();
    for (const auto& s : traj.samples) {
        Json row{{"t", s.t}, {"objective", s.objective}, {"nnz", detail::nonzeros(s.a).size()}};
        if (include_states) {
            row["u"] = to_json(s.u);
            row["a"] = to_json(s.a);
        }
        samples.push_back(std::move(row));
    }
    j["samples"] = std::move(samples);
    Json events = Json::array();
    for (const auto& e : traj.switch_events)
        events.push_back({{"t", e.t}, {"entered", to_json(e.entered)}, {"left", to_json(e.left)}, {"active", to_json(e.active)}});
    j["switch_events"] = std::move(events);
    return j;
}

inline Json to_json(const CriticalPointReport& r) {
    return {{"active_slack", r.active_slack}, {"inactive_slack", r.inactive_slack}, {"active_set", to_json(r.active_set)}};
}

inline Json to_json(const RateEstimate& r) {
    return {{"alpha", r.alpha}, {"delta", r.delta}, {"tau", r.tau}, {"speed", r.speed}, {"valid", r.valid}};
}

// ---------------------------------------------------------------------------

/// "# lca <version> key=value key=value ..." provenance line for CSV files.
inline std::string parameter_comment(const std::vector<std::pair<std::string, std::string>>& params) {
    std::string line = std::string("# lca ") + version;
    for (const auto& [k, v] : params) line += " " + k + "=" + v;
    return line;
}

/// Minimal CSV emitter: one comment line, one header row, then numeric rows.
class CsvWriter {
public:
    CsvWriter(std::ostream& out, const std::string& comment, const std::vector<std::string>& header) : out_(out) {
        out_ << comment << '\n';
        for (std::size_t i = 0; i < header.size(); ++i) out_ << (i ? "," : "") << header[i];
        out_ << '\n';
    }

    CsvWriter& cell(double x) { return raw(format_double(x)); }
    CsvWriter& cell(long long x) { return raw(std::to_string(x)); }
    CsvWriter& cell(std::size_t x) { return raw(std::to_string(x)); }
    CsvWriter& cell(int x) { return raw(std::to_string(x)); }
    CsvWriter& cell(bool x) { return raw(x ? "1" : "0"); }

    void end_row() {
        out_ << '\n';
        first_ = true;
    }

private:
    CsvWriter& raw(const std::string& s) {
        if (!first_) out_ << ',';
        out_ << s;
        first_ = false;
        return *this;
    }

    std::ostream& out_;
    bool first_ = true;
};

/// One row per sample: t, V, nnz(a), optionally followed by u_0..u_{N-1}
/// and a_0..a_{N-1}.
inline void write_trajectory_csv(std::ostream& out, const Trajectory& traj, const std::string& comment,
                                 bool include_vectors = false) {
    std::vector<std::string> header{"t", "V", "nnz"};
    const Index n = traj.samples.empty() ? 0 : traj.samples.front().u.size();
    if (include_vectors) {
        for (Index i = 0; i < n; ++i) header.push_back("u" + std::to_string(i));
        for (Index i = 0; i < n; ++i) header.push_back("a" + std::to_string(i));
    }
    CsvWriter csv(out, comment, header);
    for (const auto& s : traj.samples) {
        csv.cell(s.t).cell(s.objective).cell(detail::nonzeros(s.a).size());
        if (include_vectors) {
            for (Index i = 0; i < n; ++i) csv.cell(s.u[i]);
            for (Index i = 0; i < n; ++i) csv.cell(s.a[i]);
        }
        csv.end_row();
    }
}

/// Columns t, normalized_error, bound_final, bound_max.
inline void write_decay_csv(std::ostream& out, const std::vector<DecayPoint>& curve, double slope_final,
                            double slope_max, const std::string& comment) {
    CsvWriter csv(out, comment, {"t", "normalized_error", "bound_final", "bound_max"});
    for (const auto& p : curve)
        csv.cell(p.t).cell(p.value).cell(std::exp(slope_final * p.t)).cell(std::exp(slope_max * p.t)).end_row();
}

}  // namespace lca
