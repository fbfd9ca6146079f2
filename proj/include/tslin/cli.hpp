#pragma once

#include <cctype>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "tslin/errors.hpp"
#include "tslin/io.hpp"
#include "tslin/simulate.hpp"
#include "tslin/stability.hpp"
#include "tslin/stabilize.hpp"

namespace tslin::cli {

inline constexpr const char* kVersion = "tslin 0.1.0";

/// Exit codes: analyze 0/10/11 (stable/unstable/inconclusive), stabilize
/// 0/20/21 (feasible/infeasible/not stabilizable), simulate 0. Violated
/// preconditions and malformed inputs exit 2 with a JSON error object.
inline constexpr int kExitUnstable = 10;
inline constexpr int kExitInconclusive = 11;
inline constexpr int kExitInfeasible = 20;
inline constexpr int kExitNotStabilizable = 21;
inline constexpr int kExitError = 2;

namespace detail {

inline Vector parse_number_list(const std::string& text, const std::string& flag) {
    Vector values;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            std::size_t pos = 0;
            values.push_back(std::stod(item, &pos));
            while (pos < item.size() && std::isspace(static_cast<unsigned char>(item[pos])))
                ++pos;
            if (pos != item.size())
                throw std::invalid_argument(item);
        } catch (const std::exception&) {
            throw ParseError(flag + ": \"" + item + "\" is not a number");
        }
    }
    if (values.empty())
        throw ParseError(flag + ": expected a comma-separated list of numbers");
    return values;
}

inline json schemas() {
    return json{
        {"system_file",
         {{"A", "required; square row-major matrix, order <= 64"},
          {"B", "optional; matrix with as many rows as A (default: zero column)"},
          {"timescale",
           {{"continuous", {{"kind", "continuous"}, {"horizon", {"t0", "t1"}}}},
            {"uniform", {{"kind", "uniform"}, {"h", "step > 0"}, {"horizon", {"t0", "t1"}}}},
            {"atoms",
             {{"kind", "atoms"},
              {"atoms", {"{\"point\": t} or {\"interval\": [a, b]}"}},
              {"period", "null or period > pattern span"},
              {"repetitions", "optional copy count; omitted = unbounded"}}},
            {"geometric", {{"kind", "geometric"}, {"q", "ratio > 1"}, {"horizon", {"t0", "t1"}}}}}},
          {"metadata", "optional string map"}}},
        {"analyze_report", {"positivity", "stability"}},
        {"stabilize_report",
         {"status", "K", "failing", "witness", "decomposition", "alpha", "constraints",
          "closed_loop", "conservative_gate"}},
        {"conventions",
         {{"polynomials", "coefficient arrays ascending degree"},
          {"extended_reals", "numbers, or the strings \"inf\" / \"-inf\""},
          {"trajectory_csv", "header t,x1..xn,u1..um; 17 significant digits"}}}};
}

inline int run_analyze(const SystemFile& sf, std::ostream& out) {
    const TimeScale ts = make_timescale(sf.timescale);
    const PositivityReport pos = check_positive_system(sf.a, sf.b, ts);
    const StabilityReport stab = assess_stability(sf.a, ts);

    json report{{"positivity", positivity_to_json(pos)}, {"stability", stability_to_json(stab)}};
    out << report.dump(2) << "\n";
    switch (stab.verdict) {
    case StabilityVerdict::Stable:
        return 0;
    case StabilityVerdict::Unstable:
        return kExitUnstable;
    default:
        return kExitInconclusive;
    }
}

inline int run_stabilize(const SystemFile& sf, double margin, double tol, std::ostream& out) {
    if (sf.b.cols() != 1)
        throw PreconditionError("stabilize: only single-input systems (m = 1) are supported");
    const TimeScale ts = make_timescale(sf.timescale);
    StabilizeOptions opts;
    opts.margin = margin;
    opts.rank_tol = tol;
    const StabilizationResult res = positive_stabilize(sf.a, sf.b.col(0), ts, opts);
    out << stabilization_to_json(res).dump(2) << "\n";
    switch (res.status) {
    case StabilizationStatus::Feasible:
        return 0;
    case StabilizationStatus::Infeasible:
        return kExitInfeasible;
    default:
        return kExitNotStabilizable;
    }
}

inline int run_simulate(const SystemFile& sf, const std::string& x0_text,
                        const std::optional<std::string>& u_text, std::optional<double> t_end,
                        const std::optional<std::string>& out_path, std::ostream& out) {
    const TimeScale ts = make_timescale(sf.timescale);
    const Vector x0 = parse_number_list(x0_text, "--x0");
    if (x0.size() != sf.a.rows())
        throw ValidationError("--x0: length must match the system order");

    Vector u_const(sf.b.cols(), 0.0);
    if (u_text) {
        u_const = parse_number_list(*u_text, "--u");
        if (u_const.size() != sf.b.cols())
            throw ValidationError("--u: length must match the input count");
    }

    const double t0 = ts.min_time();
    double end;
    if (t_end) {
        end = *t_end;
        if (end > ts.sup_time() + kBoundaryTol)
            throw DomainError("--t-end: beyond the stored horizon");
        end = ts.floor_time(end);
    } else {
        const double sup = ts.sup_time();
        end = std::isfinite(sup) ? sup : ts.floor_time(t0 + 10.0);
    }

    const Trajectory traj = simulate(sf.a, sf.b, ts, x0, constant_input(u_const), t0, end);
    if (out_path) {
        std::ofstream file(*out_path);
        if (!file)
            throw DataError("cannot open output file: " + *out_path);
        write_trajectory_csv(file, traj);
    } else {
        write_trajectory_csv(out, traj);
    }
    return 0;
}

} // namespace detail

/// Entry point shared by the binary and the tests. `args` excludes argv[0].
inline int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"positivity, stability and positive stabilization of linear systems on time scales"};
    app.name("tslin");

    bool show_version = false;
    bool show_schema = false;
    app.add_flag("--version", show_version, "print version and exit");
    app.add_flag("--schema", show_schema, "print the JSON schemas and exit");

    std::string system_path;
    std::optional<std::string> out_path;
    std::string x0_text;
    std::optional<std::string> u_text;
    std::optional<double> t_end;
    double margin = 1e-6;
    double tol = 1e-9;

    CLI::App* analyze = app.add_subcommand("analyze", "positivity and stability reports");
    analyze->add_option("--system", system_path, "system JSON file")->required();

    CLI::App* stabilize = app.add_subcommand("stabilize", "synthesize a positive stabilizing gain");
    stabilize->add_option("--system", system_path, "system JSON file")->required();
    stabilize->add_option("--margin", margin, "strict-inequality margin");
    stabilize->add_option("--tol", tol, "rank tolerance");

    CLI::App* simulate = app.add_subcommand("simulate", "simulate and write a trajectory CSV");
    simulate->add_option("--system", system_path, "system JSON file")->required();
    simulate->add_option("--x0", x0_text, "initial state, comma separated")->required();
    simulate->add_option("--u", u_text, "constant input, comma separated");
    simulate->add_option("--t-end", t_end, "simulation end time");
    simulate->add_option("--out", out_path, "trajectory CSV path (default: stdout)");

    std::vector<std::string> argv_store;
    argv_store.reserve(args.size() + 1);
    argv_store.push_back("tslin");
    for (const std::string& a : args)
        argv_store.push_back(a);
    std::vector<char*> argv;
    for (std::string& s : argv_store)
        argv.push_back(s.data());

    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) { // --help
            out << app.help();
            return 0;
        }
        err << e.what() << "\n";
        return kExitError;
    }

    if (show_version) {
        out << kVersion << "\n";
        return 0;
    }
    if (show_schema) {
        out << detail::schemas().dump(2) << "\n";
        return 0;
    }

    try {
        if (analyze->parsed())
            return detail::run_analyze(load_system_file(system_path), out);
        if (stabilize->parsed())
            return detail::run_stabilize(load_system_file(system_path), margin, tol, out);
        if (simulate->parsed())
            return detail::run_simulate(load_system_file(system_path), x0_text, u_text, t_end,
                                        out_path, out);
    } catch (const ParseError& e) {
        out << error_to_json("ParseError", e.what()).dump(2) << "\n";
        return kExitError;
    } catch (const ValidationError& e) {
        out << error_to_json("ValidationError", e.what()).dump(2) << "\n";
        return kExitError;
    } catch (const PreconditionError& e) {
        out << error_to_json("PreconditionError", e.what()).dump(2) << "\n";
        return kExitError;
    } catch (const DomainError& e) {
        out << error_to_json("DomainError", e.what()).dump(2) << "\n";
        return kExitError;
    } catch (const DataError& e) {
        out << error_to_json("DataError", e.what()).dump(2) << "\n";
        return kExitError;
    } catch (const NumericalError& e) {
        out << error_to_json("NumericalError", e.what()).dump(2) << "\n";
        return kExitError;
    }

    err << app.help();
    return kExitError;
}

} // namespace tslin::cli
