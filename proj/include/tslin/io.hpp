#pragma once

#include <cstdio>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "tslin/errors.hpp"
#include "tslin/matrix.hpp"
#include "tslin/polynomial.hpp"
#include "tslin/positivity.hpp"
#include "tslin/simulate.hpp"
#include "tslin/stability.hpp"
#include "tslin/stabilize.hpp"
#include "tslin/timescale.hpp"

namespace tslin {

using json = nlohmann::json;

// ---------------------------------------------------------------------------
// extended reals: +/-inf travel as strings, finite values as numbers
// ---------------------------------------------------------------------------

inline json extended_to_json(double x) {
    if (std::isinf(x))
        return x > 0 ? json("inf") : json("-inf");
    return json(x);
}

inline double extended_from_json(const json& j) {
    if (j.is_string()) {
        const std::string s = j.get<std::string>();
        if (s == "inf" || s == "+inf")
            return std::numeric_limits<double>::infinity();
        if (s == "-inf")
            return -std::numeric_limits<double>::infinity();
        throw ParseError("expected a number or \"inf\"/\"-inf\", got \"" + s + "\"");
    }
    return j.get<double>();
}

// ---------------------------------------------------------------------------
// matrices and spectra
// ---------------------------------------------------------------------------

inline json matrix_to_json(const Matrix& m) {
    json rows = json::array();
    for (std::size_t i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (std::size_t j = 0; j < m.cols(); ++j)
            row.push_back(m(i, j));
        rows.push_back(std::move(row));
    }
    return rows;
}

inline Matrix matrix_from_json(const json& j, const std::string& field) {
    if (!j.is_array() || j.empty() || !j[0].is_array())
        throw ValidationError(field + ": expected a nested array of rows");
    const std::size_t rows = j.size();
    const std::size_t cols = j[0].size();
    Matrix m(rows, cols);
    for (std::size_t i = 0; i < rows; ++i) {
        if (!j[i].is_array() || j[i].size() != cols)
            throw ValidationError(field + ": ragged rows");
        for (std::size_t c = 0; c < cols; ++c) {
            if (!j[i][c].is_number())
                throw ValidationError(field + ": entries must be numbers");
            m(i, c) = j[i][c].get<double>();
        }
    }
    return m;
}

inline json spectrum_to_json(const Spectrum& s) {
    json arr = json::array();
    for (const Complex& z : s)
        arr.push_back(json{{"re", z.real()}, {"im", z.imag()}});
    return arr;
}

// ---------------------------------------------------------------------------
// time scale specs
// ---------------------------------------------------------------------------

inline json timescale_spec_to_json(const TimeScaleSpec& spec) {
    if (const auto* c = std::get_if<ContinuousSpec>(&spec))
        return json{{"kind", "continuous"}, {"horizon", {c->t0, c->t1}}};
    if (const auto* u = std::get_if<UniformGridSpec>(&spec))
        return json{{"kind", "uniform"}, {"h", u->h}, {"horizon", {u->t0, u->t1}}};
    if (const auto* g = std::get_if<GeometricSpec>(&spec))
        return json{{"kind", "geometric"}, {"q", g->q}, {"horizon", {g->t0, g->t1}}};
    const auto& e = std::get<ExplicitAtomsSpec>(spec);
    json atoms = json::array();
    for (const TimeScaleAtom& at : e.atoms) {
        if (at.is_point())
            atoms.push_back(json{{"point", at.a}});
        else
            atoms.push_back(json{{"interval", {at.a, at.b}}});
    }
    json out{{"kind", "atoms"}, {"atoms", std::move(atoms)}, {"period", nullptr}};
    if (e.extension) {
        out["period"] = e.extension->period;
        if (e.extension->repetitions)
            out["repetitions"] = *e.extension->repetitions;
    }
    return out;
}

inline TimeScaleSpec timescale_spec_from_json(const json& j) {
    if (!j.is_object() || !j.contains("kind"))
        throw ValidationError("timescale: expected an object with a \"kind\"");
    const std::string kind = j.at("kind").get<std::string>();

    auto horizon = [&](double& t0, double& t1) {
        const json& h = j.at("horizon");
        if (!h.is_array() || h.size() != 2)
            throw ValidationError("timescale.horizon: expected [t0, t1]");
        t0 = h[0].get<double>();
        t1 = h[1].get<double>();
    };

    if (kind == "continuous") {
        ContinuousSpec c;
        horizon(c.t0, c.t1);
        return c;
    }
    if (kind == "uniform") {
        UniformGridSpec u;
        u.h = j.at("h").get<double>();
        horizon(u.t0, u.t1);
        return u;
    }
    if (kind == "geometric") {
        GeometricSpec g;
        g.q = j.at("q").get<double>();
        horizon(g.t0, g.t1);
        return g;
    }
    if (kind == "atoms") {
        ExplicitAtomsSpec e;
        for (const json& aj : j.at("atoms")) {
            if (aj.contains("point"))
                e.atoms.push_back(TimeScaleAtom::point(aj.at("point").get<double>()));
            else if (aj.contains("interval")) {
                const json& iv = aj.at("interval");
                if (!iv.is_array() || iv.size() != 2)
                    throw ValidationError("timescale.atoms: interval expects [a, b]");
                e.atoms.push_back(TimeScaleAtom::interval(iv[0].get<double>(), iv[1].get<double>()));
            } else {
                throw ValidationError("timescale.atoms: entry needs \"point\" or \"interval\"");
            }
        }
        if (j.contains("period") && !j.at("period").is_null()) {
            PeriodicExtension ext;
            ext.period = j.at("period").get<double>();
            if (j.contains("repetitions") && !j.at("repetitions").is_null())
                ext.repetitions = j.at("repetitions").get<long>();
            e.extension = ext;
        }
        return e;
    }
    throw ValidationError("timescale.kind: unknown kind \"" + kind + "\"");
}

// ---------------------------------------------------------------------------
// system files
// ---------------------------------------------------------------------------

struct SystemFile {
    Matrix a;
    Matrix b;
    TimeScaleSpec timescale;
    std::map<std::string, std::string> metadata;
};

inline SystemFile parse_system_text(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("system file: ") + e.what());
    }
    if (!j.is_object())
        throw ParseError("system file: expected a JSON object");
    if (!j.contains("A"))
        throw ParseError("system file: missing required field \"A\"");
    if (!j.contains("timescale"))
        throw ParseError("system file: missing required field \"timescale\"");

    SystemFile sf;
    sf.a = matrix_from_json(j.at("A"), "A");
    if (!sf.a.is_square())
        throw ValidationError("A: must be square");
    if (sf.a.rows() > kMaxOrder)
        throw ValidationError("A: order above supported limit 64");

    if (j.contains("B") && !j.at("B").is_null()) {
        sf.b = matrix_from_json(j.at("B"), "B");
        if (sf.b.rows() != sf.a.rows())
            throw ValidationError("B: row count must match A");
    } else {
        sf.b = Matrix(sf.a.rows(), 1, 0.0);
    }

    sf.timescale = timescale_spec_from_json(j.at("timescale"));
    make_timescale(sf.timescale); // validate eagerly

    if (j.contains("metadata")) {
        for (const auto& [key, value] : j.at("metadata").items())
            sf.metadata[key] = value.is_string() ? value.get<std::string>() : value.dump();
    }
    return sf;
}

inline SystemFile load_system_file(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw ParseError("cannot open system file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_system_text(buf.str());
}

// ---------------------------------------------------------------------------
// reports
// ---------------------------------------------------------------------------

inline const char* violation_kind_name(ViolatingEntry::Kind k) {
    switch (k) {
    case ViolatingEntry::Kind::OffDiagonal:
        return "off_diagonal";
    case ViolatingEntry::Kind::Diagonal:
        return "diagonal";
    default:
        return "input";
    }
}

inline json positivity_to_json(const PositivityReport& rep) {
    auto entries = [](const std::vector<ViolatingEntry>& list) {
        json arr = json::array();
        for (const ViolatingEntry& e : list)
            arr.push_back(json{{"i", e.i},
                               {"j", e.j},
                               {"value", e.value},
                               {"kind", violation_kind_name(e.kind)}});
        return arr;
    };
    return json{{"verdict", rep.verdict},
                {"is_metzler", rep.is_metzler},
                {"c_of_A", rep.c_of_a},
                {"gamma", extended_to_json(rep.gamma)},
                {"violating_entries", entries(rep.violating_entries)},
                {"near_zero_warnings", entries(rep.near_zero_warnings)}};
}

inline const char* verdict_name(StabilityVerdict v) {
    switch (v) {
    case StabilityVerdict::Stable:
        return "Stable";
    case StabilityVerdict::Unstable:
        return "Unstable";
    default:
        return "Inconclusive";
    }
}

inline const char* method_name(StabilityMethod m) {
    switch (m) {
    case StabilityMethod::CoefficientTest:
        return "CoefficientTest";
    case StabilityMethod::DiscTest:
        return "DiscTest";
    default:
        return "HalfPlaneTest";
    }
}

inline json stability_to_json(const StabilityReport& rep) {
    return json{{"verdict", verdict_name(rep.verdict)},
                {"method", method_name(rep.method)},
                {"chi_coefficients", rep.chi_coefficients}, // ascending degree
                {"spectrum", spectrum_to_json(rep.spectrum)},
                {"disc_margins", rep.disc_margins},
                {"exact_region", rep.exact_region},
                {"marginal", rep.marginal}};
}

inline json decay_to_json(const DecayFit& fit) {
    return json{{"K_hat", fit.k_hat}, {"alpha_hat", fit.alpha_hat}, {"residual", fit.residual}};
}

inline json closed_loop_to_json(const ClosedLoopReport& rep) {
    return json{{"positivity", positivity_to_json(rep.positivity)},
                {"chi_coefficients", rep.chi_coefficients},
                {"coefficients_positive", rep.coefficients_positive},
                {"factorization_error", rep.factorization_error},
                {"factorization_ok", rep.factorization_ok},
                {"decay", decay_to_json(rep.decay)},
                {"decay_ok", rep.decay_ok},
                {"fit_horizon", rep.fit_horizon},
                {"passed", rep.passed()}};
}

inline const char* status_name(StabilizationStatus s) {
    switch (s) {
    case StabilizationStatus::Feasible:
        return "Feasible";
    case StabilizationStatus::Infeasible:
        return "Infeasible";
    default:
        return "NotStabilizable";
    }
}

inline json stabilization_to_json(const StabilizationResult& res) {
    json out{{"status", status_name(res.status)}, {"conservative_gate", res.conservative_gate}};
    if (res.status == StabilizationStatus::Feasible)
        out["K"] = res.gain;
    if (res.status == StabilizationStatus::NotStabilizable)
        out["failing"] = spectrum_to_json(res.failing);
    if (res.status == StabilizationStatus::Infeasible)
        out["witness"] = res.witness;
    if (res.decomposition) {
        const Decomposition& dec = *res.decomposition;
        out["decomposition"] = json{{"k", dec.k},
                                    {"a", dec.a},
                                    {"pattern_error", dec.pattern_error},
                                    {"T", matrix_to_json(dec.t)}};
    }
    if (res.alphas) {
        json arr = json::array();
        for (double x : res.alphas->alphas)
            arr.push_back(extended_to_json(x));
        out["alpha"] = std::move(arr);
    }
    if (res.constraints) {
        json bounds = json::array();
        for (double x : res.constraints->lower_bounds)
            bounds.push_back(extended_to_json(x));
        json rows = json::array();
        for (const auto& [v, ai] : res.constraints->strict_rows)
            rows.push_back(json{{"v", v}, {"a", ai}});
        out["constraints"] = json{{"lower_bounds", std::move(bounds)}, {"strict_rows", std::move(rows)}};
    }
    if (res.closed_loop)
        out["closed_loop"] = closed_loop_to_json(*res.closed_loop);
    return out;
}

inline json error_to_json(const std::string& type, const std::string& message) {
    return json{{"error", {{"type", type}, {"message", message}}}};
}

// ---------------------------------------------------------------------------
// trajectories
// ---------------------------------------------------------------------------

/// CSV with header t,x1,...,xn,u1,...,um; 17 significant digits per value.
inline void write_trajectory_csv(std::ostream& out, const Trajectory& traj) {
    const std::size_t n = traj.states.empty() ? 0 : traj.states.front().size();
    const std::size_t m = traj.inputs.empty() ? 0 : traj.inputs.front().size();
    out << "t";
    for (std::size_t i = 1; i <= n; ++i)
        out << ",x" << i;
    for (std::size_t i = 1; i <= m; ++i)
        out << ",u" << i;
    out << "\n";

    char buf[64];
    auto emit = [&](double v) {
        std::snprintf(buf, sizeof(buf), "%.17g", v);
        out << buf;
    };
    for (std::size_t r = 0; r < traj.times.size(); ++r) {
        emit(traj.times[r]);
        for (double v : traj.states[r]) {
            out << ",";
            emit(v);
        }
        for (double v : traj.inputs[r]) {
            out << ",";
            emit(v);
        }
        out << "\n";
    }
}

} // namespace tslin
