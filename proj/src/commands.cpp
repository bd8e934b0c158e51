// Copyright 2026 The qnd Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "qnd/commands.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <numeric>
#include <sstream>

#include "qnd/errors.hpp"
#include "qnd/instruments.hpp"
#include "qnd/rng.hpp"
#include "qnd/shiftmodel.hpp"
#include "qnd/statistics.hpp"
#include "qnd/textio.hpp"
#include "qnd/trajectories.hpp"

namespace qnd {

namespace {

using textio::format_double;

std::filesystem::path require_out(const RunConfig &cfg) {
    if (cfg.out_dir.empty()) {
        throw ParseError("no output directory: pass --out or set dir in [output]");
    }
    std::filesystem::create_directories(cfg.out_dir);
    return cfg.out_dir;
}

// Writes `body` to out/name and records it.
void emit(CommandOutcome &outcome, const std::filesystem::path &path, const std::string &body) {
    std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw ParseError("cannot write " + path.string());
    }
    out << body;
    outcome.files.push_back(path);
}

// quantity,value,bound,passed rows for declared tolerances.
class CheckTable {
   public:
    void at_most(const std::string &quantity, double value, double bound) { add(quantity, value, bound, value <= bound, "<="); }
    void at_least(const std::string &quantity, double value, double bound) { add(quantity, value, bound, value >= bound, ">="); }
    void report(const std::string &quantity, double value) {
        body_ << quantity << "," << format_double(value) << ",,\n";
    }

    std::string render(const std::string &what, const std::string &config_hash) const {
        std::ostringstream out;
        out << "# qnd " << what << " config=" << config_hash << "\n";
        out << "# units: dimensionless unless the quantity name says otherwise; bound is the declared tolerance\n";
        out << "# columns: quantity,value,bound,passed\n";
        out << body_.str();
        return out.str();
    }

    const std::vector<std::string> &failures() const { return failures_; }

   private:
    void add(const std::string &quantity, double value, double bound, bool passed, const char *rel) {
        passed = passed && std::isfinite(value);
        body_ << quantity << "," << format_double(value) << "," << rel << format_double(bound) << ","
              << (passed ? "yes" : "no") << "\n";
        if (!passed) {
            failures_.push_back(quantity + " = " + format_double(value) + " violates " + rel + " " +
                                format_double(bound));
        }
    }

    std::ostringstream body_;
    std::vector<std::string> failures_;
};

std::string header(const char *what, const RunConfig &cfg, const std::string &extra = "") {
    std::string h = std::string("# qnd ") + what + " config=" + cfg.hash;
    if (!extra.empty()) {
        h += " " + extra;
    }
    return h + "\n";
}

Operator random_operator(std::size_t dim, std::uint64_t seed, std::uint64_t &counter) {
    Matrix m(dim, dim);
    for (std::size_t i = 0; i < dim; ++i) {
        for (std::size_t j = 0; j < dim; ++j) {
            const auto [u, v] = rng::uniform_pair(seed, rng::Stream::auxiliary, counter++);
            m(i, j) = Complex(2.0 * u - 1.0, 2.0 * v - 1.0);
        }
    }
    return Operator(std::move(m));
}

CoarseGraining read_grain(const ConfigTable &t) {
    const int first = t.has("shift.first_index") ? static_cast<int>(t.real("shift.first_index")) : 0;
    if (t.has("shift.cells")) {
        std::vector<Interval> cells;
        std::istringstream in(t.require("shift.cells"));
        std::string item;
        while (std::getline(in, item, ',')) {
            const auto colon = item.find(':');
            if (colon == std::string::npos) {
                throw ParseError("config key 'shift.cells': expected lo:hi pairs, got '" + item + "'");
            }
            const auto trimmed = [](std::string s) {
                s.erase(0, s.find_first_not_of(" \t"));
                s.erase(s.find_last_not_of(" \t") + 1);
                return s;
            };
            cells.push_back({textio::parse_double(trimmed(item.substr(0, colon))),
                             textio::parse_double(trimmed(item.substr(colon + 1)))});
        }
        return CoarseGraining(std::move(cells), first);
    }
    return CoarseGraining::uniform(t.real("shift.cell_lo"), t.real("shift.cell_step"),
                                   static_cast<std::size_t>(t.u64("shift.cell_count")), first);
}

std::size_t grid_steps(double t, double dt, const char *key) {
    const double n = std::round(t / dt);
    if (n < 0.0 || std::abs(n * dt - t) > 1e-9 * std::max(1.0, t)) {
        throw ParseError(std::string("config key '") + key + "': time " + format_double(t) +
                         " is not on the dt grid");
    }
    return static_cast<std::size_t>(n);
}

}  // namespace

CommandOutcome cmd_instrument_table(const RunConfig &cfg) {
    const ConfigTable &t = cfg.table;
    const std::filesystem::path out = require_out(cfg);
    const std::string kind = t.require("instrument.kind");
    const double duration = t.real("instrument.t");
    const Operator op = t.op("instrument.operator");
    const PureState xi = t.has("instrument.state") ? t.state("instrument.state") : cfg.require_model().initial;
    if (xi.dim() != op.dim()) {
        throw ParseError("config key 'instrument.state': dimension " + std::to_string(xi.dim()) +
                         " does not match the operator dimension " + std::to_string(op.dim()));
    }
    if (!xi.is_normalized(1e-10)) {
        throw ParseError("config key 'instrument.state': state is not normalized");
    }

    CommandOutcome outcome;
    std::optional<Instrument> instr;
    try {
        if (kind == "gaussian") {
            const double hbar = t.has("instrument.hbar") ? t.real("instrument.hbar")
                                                         : (cfg.model ? cfg.model->hbar : 1.0);
            std::optional<OutcomeSpace> space;
            if (t.has("instrument.grid_min") || t.has("instrument.grid_max") || t.has("instrument.grid_points")) {
                space = OutcomeSpace::grid(t.real("instrument.grid_min"), t.real("instrument.grid_max"),
                                           static_cast<std::size_t>(t.u64("instrument.grid_points")));
            }
            instr = gaussian_instrument(op, duration, hbar, space);
        } else if (kind == "counting") {
            std::optional<std::size_t> n_max;
            if (auto v = t.u64_opt("instrument.n_max")) {
                n_max = static_cast<std::size_t>(*v);
            }
            instr = counting_instrument(op, duration, n_max);
        } else {
            throw ParseError("config key 'instrument.kind': expected gaussian or counting, got '" + kind + "'");
        }
    } catch (const CompletenessError &e) {
        outcome.failures.push_back(e.what());
        return outcome;
    }

    const std::vector<double> dens = outcome_densities(*instr, xi);
    double total = 0.0;
    for (std::size_t i = 0; i < dens.size(); ++i) {
        total += dens[i] * instr->space().quadrature_weight(i);
    }
    const bool gaussian = kind == "gaussian";
    std::ostringstream body;
    body << header("instrument_table", cfg, "kind=" + kind);
    body << "# completeness_defect=" << format_double(instr->completeness_defect())
         << " tolerance=" << format_double(instr->tolerance()) << " total_probability=" << format_double(total)
         << "\n";
    body << (gaussian ? "# units: y [output], g [probability density per unit y]\n# columns: y,g\n"
                      : "# units: n [count], P [probability]\n# columns: n,P\n");
    for (std::size_t i = 0; i < dens.size(); ++i) {
        const double value = gaussian ? dens[i] : dens[i] * instr->space().reference_weight(i);
        body << format_double(instr->space().value(i)) << "," << format_double(value) << "\n";
    }
    emit(outcome, out / "instrument_table.csv", body.str());
    export_instrument(*instr, out / "instrument");
    outcome.files.push_back(out / "instrument");

    if (instr->completeness_defect() > instr->tolerance()) {
        outcome.failures.push_back("completeness defect " + format_double(instr->completeness_defect()) +
                                   " exceeds " + format_double(instr->tolerance()));
    }
    if (std::abs(total - 1.0) > instr->tolerance()) {
        outcome.failures.push_back("table sums to " + format_double(total) + ", not 1 within " +
                                   format_double(instr->tolerance()));
    }
    return outcome;
}

CommandOutcome cmd_simulate(const RunConfig &cfg) {
    const ModelSpec &model = cfg.require_model();
    const std::filesystem::path out = require_out(cfg);
    CommandOutcome outcome;
    if (auto w = stability_warning(model, cfg.sde)) {
        outcome.warnings.push_back(*w);
    }

    std::ostringstream manifest;
    manifest << header("simulate", cfg,
                       "model=" + textio::hex64(model.hash()) + " unraveling=" + unraveling_name(model.unraveling) +
                           " scheme=" + scheme_name(cfg.sde.scheme) + " t_final=" + format_double(cfg.sde.t_final) +
                           " dt=" + format_double(cfg.sde.dt) + " base_seed=" + std::to_string(cfg.sde.seed) +
                           " n_paths=" + std::to_string(cfg.n_paths));
    for (const auto &w : outcome.warnings) {
        manifest << "# warning: " << w << "\n";
    }
    manifest << "# units: path [index], seed [u64], status [ok|failed], file [relative path]\n";
    manifest << "# columns: path,seed,status,file\n";

    for (std::size_t i = 0; i < cfg.n_paths; ++i) {
        SDEConfig sde = cfg.sde;
        sde.seed = rng::path_seed(cfg.sde.seed, i);
        char name[40];
        std::snprintf(name, sizeof(name), "paths/path_%06zu.csv", i);
        try {
            const TrajectoryRecord rec = model.unraveling == Unraveling::diffusive ? integrate_diffusive(model, sde)
                                                                                    : integrate_counting(model, sde);
            std::ostringstream body;
            body << header("trajectory_file", cfg);
            write_record(body, rec, model.dim());
            emit(outcome, out / name, body.str());
            manifest << i << "," << sde.seed << ",ok," << name << "\n";
        } catch (const NumericalError &e) {
            manifest << i << "," << sde.seed << ",failed,\n";
            outcome.failures.push_back("path " + std::to_string(i) + ": " + e.what());
        }
    }
    emit(outcome, out / "manifest.csv", manifest.str());
    return outcome;
}

CommandOutcome cmd_shift_check(const RunConfig &cfg) {
    const ConfigTable &t = cfg.table;
    const std::filesystem::path out = require_out(cfg);
    const Operator r = t.op("shift.R");
    const DilatedModel model = build_dilation(r, read_grain(t), static_cast<std::size_t>(t.u64("shift.pointer_size")));
    const std::size_t dim = model.object_dim;

    CheckTable checks;
    checks.at_most("unitarity_defect", unitarity_defect(model), t.real_opt("shift.unitarity_tolerance").value_or(1e-10));

    // Closed form of the output observable on the subspace where the pointer does not wrap.
    const std::vector<std::size_t> keep = no_wrap_indices(model);
    const Matrix formula = output_observable_formula(model).matrix();
    double formula_err = 0.0;
    for (std::size_t a : keep) {
        for (std::size_t b : keep) {
            formula_err = std::max(formula_err, std::abs(model.y.matrix()(a, b) - formula(a, b)));
        }
    }
    checks.at_most("output_formula_error_no_wrap", formula_err, 1e-12);

    const double hcomm_tol = t.real_opt("shift.hcomm_tolerance").value_or(1e-12);
    const std::size_t n_random = static_cast<std::size_t>(t.u64_opt("shift.random_operators").value_or(20));
    std::uint64_t counter = 0;
    double hcomm = 0.0;
    for (std::size_t k = 0; k < n_random; ++k) {
        hcomm = std::max(hcomm, nondemolition_check(model, random_operator(dim, cfg.sde.seed, counter)).hcomm);
    }
    checks.at_most("hcomm_random_max", hcomm, hcomm_tol);

    const Operator c = t.has("shift.C") ? t.op("shift.C") : (dim == 2 ? pauli_x() : random_operator(dim, cfg.sde.seed, counter));
    const NondemolitionReport rep = nondemolition_check(model, c);
    checks.at_most("hcomm_C", rep.hcomm, hcomm_tol);
    if (auto bound = t.real_opt("shift.icomm_min")) {
        checks.at_least("icomm_C", rep.icomm, *bound);
    } else {
        checks.report("icomm_C", rep.icomm);
    }

    const std::size_t p_points = static_cast<std::size_t>(t.u64_opt("shift.p_points").value_or(64));
    const double p_max = t.real_opt("shift.p_max").value_or(std::numbers::pi);
    std::vector<double> p_grid(p_points);
    for (std::size_t k = 0; k < p_points; ++k) {
        p_grid[k] = p_points == 1 ? 0.0 : -p_max + 2.0 * p_max * static_cast<double>(k) / static_cast<double>(p_points - 1);
    }
    PureState xi = t.has("shift.state") ? t.state("shift.state")
                                         : PureState(Vector::Constant(dim, Complex(1.0 / std::sqrt(double(dim)))));
    checks.at_most("characteristic_max_error", characteristic_match(model, xi, p_grid),
                   t.real_opt("shift.characteristic_tolerance").value_or(1e-10));

    const Instrument induced = induced_instrument(model);
    checks.at_most("induced_completeness_defect", induced.completeness_defect(), kDiscreteCompletenessTol);

    CommandOutcome outcome;
    emit(outcome, out / "shift_check.csv", checks.render("shift_check", cfg.hash));
    export_instrument(induced, out / "induced_instrument");
    outcome.files.push_back(out / "induced_instrument");
    outcome.failures = checks.failures();
    return outcome;
}

CommandOutcome cmd_ensemble_stats(const RunConfig &cfg) {
    const ModelSpec &model = cfg.require_model();
    const ConfigTable &t = cfg.table;
    const std::filesystem::path out = require_out(cfg);
    CommandOutcome outcome;
    if (auto w = stability_warning(model, cfg.sde)) {
        outcome.warnings.push_back(*w);
    }

    SDEConfig sde = cfg.sde;
    const std::size_t steps = sde.steps();
    std::vector<double> times;
    std::size_t stride = steps;
    if (t.has("stats.times")) {
        times = t.real_list("stats.times");
        for (double tt : times) {
            if (tt > sde.t_final * (1.0 + 1e-12)) {
                throw ParseError("config key 'stats.times': " + format_double(tt) + " is beyond t_final");
            }
            stride = std::gcd(stride, grid_steps(tt, sde.dt, "stats.times"));
        }
    } else {
        stride = sde.record_stride;
    }
    sde.record_stride = std::max<std::size_t>(1, stride);

    const std::vector<TrajectoryRecord> records = simulate_ensemble(model, sde, cfg.n_paths);
    std::optional<std::size_t> bins;
    if (auto v = t.u64_opt("stats.bins")) {
        bins = static_cast<std::size_t>(*v);
    }
    const EnsembleSummary summary = ensemble_summary(records, bins);
    const double oracle_step = t.real_opt("stats.oracle_step").value_or(sde.dt / 10.0);
    const std::vector<double> dist_all = mixture_distances(summary, model, oracle_step);

    std::vector<double> rows_t, rows_d;
    for (std::size_t k = 0; k < summary.times.size(); ++k) {
        const bool wanted = times.empty() || std::any_of(times.begin(), times.end(), [&](double tt) {
                                return std::abs(tt - summary.times[k]) <= 1e-9 * std::max(1.0, tt);
                            });
        if (wanted) {
            rows_t.push_back(summary.times[k]);
            rows_d.push_back(dist_all[k]);
        }
    }

    CheckTable checks;
    const double rho_tol = t.real_opt("stats.rho_tolerance")
                               .value_or(3.0 / std::sqrt(static_cast<double>(cfg.n_paths)) + 10.0 * sde.dt);
    checks.at_most("trace_distance_max", *std::max_element(rows_d.begin(), rows_d.end()), rho_tol);

    std::ostringstream rho;
    write_rho_compare(rho, rows_t, rows_d, cfg.hash);
    emit(outcome, out / "rho_compare.csv", rho.str());

    std::optional<OutputLawReport> law;
    try {
        law = output_law_check(summary, model, summary.output_time);
    } catch (const RegimeError &e) {
        outcome.warnings.push_back(std::string("output law not checked: ") + e.what());
    }
    OutputLawReport shown;
    if (law) {
        shown = *law;
    } else {
        // Empirical histogram only; the theoretical column is left empty.
        const Histogram &h = summary.histogram;
        for (std::size_t b = 0; b + 1 < h.edges.size(); ++b) {
            shown.rows.push_back({0.5 * (h.edges[b] + h.edges[b + 1]), h.mass[b], std::nan("")});
        }
    }
    std::ostringstream hist;
    write_output_hist(hist, shown, model.unraveling, cfg.hash);
    emit(outcome, out / "output_hist.csv", hist.str());

    checks.report("output_time", summary.output_time);
    checks.report("effective_paths", summary.moments.effective_n);
    checks.report("mean", summary.moments.mean);
    checks.report("variance", summary.moments.variance);
    const char *law_keys[] = {"stats.cdf_tolerance", "stats.mean_sigmas", "stats.variance_rel_tolerance"};
    if (!law) {
        for (const char *key : law_keys) {
            if (t.has(key)) {
                outcome.failures.push_back(std::string(key) + " declared but the output law does not apply");
            }
        }
    } else {
        checks.report("mean_expected", law->mean_expected);
        checks.report("variance_expected", law->variance_expected);
        if (auto v = t.real_opt("stats.cdf_tolerance")) {
            checks.at_most("cdf_sup_error", law->cdf_sup_error, *v);
        } else {
            checks.report("cdf_sup_error", law->cdf_sup_error);
        }
        if (auto v = t.real_opt("stats.mean_sigmas")) {
            checks.at_most("mean_error_in_std_errors", std::abs(law->mean - law->mean_expected) / law->std_error, *v);
        }
        if (auto v = t.real_opt("stats.variance_rel_tolerance")) {
            checks.at_most("variance_relative_error",
                           std::abs(law->variance - law->variance_expected) / law->variance_expected, *v);
        }
    }
    emit(outcome, out / "output_law.csv", checks.render("output_law", cfg.hash));
    outcome.failures.insert(outcome.failures.end(), checks.failures().begin(), checks.failures().end());
    return outcome;
}

CommandOutcome cmd_oracle_compare(const RunConfig &cfg) {
    const ModelSpec &model = cfg.require_model();
    const ConfigTable &t = cfg.table;
    const std::filesystem::path out = require_out(cfg);
    if (max_abs(model.h.matrix()) > 1e-12 || !model.l.is_hermitian()) {
        throw RegimeError("oracle-compare needs H = 0 and a Hermitian L (the closed-form regime)");
    }
    std::vector<double> dts;
    if (t.has("oracle.dts")) {
        dts = t.real_list("oracle.dts");
    } else if (model.unraveling == Unraveling::diffusive) {
        dts = {4.0 * cfg.sde.dt, 2.0 * cfg.sde.dt, cfg.sde.dt};
    } else {
        dts = {cfg.sde.dt};
    }

    CommandOutcome outcome;
    CheckTable checks;
    std::ostringstream table;
    const bool diffusive = model.unraveling == Unraveling::diffusive;
    table << header("oracle_compare", cfg, "unraveling=" + std::string(unraveling_name(model.unraveling)) +
                                               " n_paths=" + std::to_string(cfg.n_paths));
    table << (diffusive ? "# units: dt [time], max_error [amplitude; max over the time grid, mean over paths]\n"
                        : "# units: dt [time], max_error [amplitude; max over the time grid and over paths]\n");
    table << "# columns: dt,max_error\n";

    if (diffusive) {
        const ConvergenceReport rep = diffusive_convergence(model, cfg.sde.t_final, dts, cfg.sde.seed, cfg.n_paths);
        for (std::size_t d = 0; d < rep.dts.size(); ++d) {
            table << format_double(rep.dts[d]) << "," << format_double(rep.errors[d]) << "\n";
        }
        checks.at_least("fitted_order", rep.order, t.real_opt("oracle.min_order").value_or(0.5));
        checks.at_least("monotone_decrease", rep.monotone ? 1.0 : 0.0, 1.0);
    } else {
        const double tol = t.real_opt("oracle.tolerance").value_or(1e-12);
        for (double dt : dts) {
            SDEConfig sde = cfg.sde;
            sde.dt = dt;
            sde.record_stride = 1;
            const double err = counting_oracle_error(model, sde, cfg.n_paths);
            table << format_double(dt) << "," << format_double(err) << "\n";
            checks.at_most("max_error_dt_" + format_double(dt), err, tol);
        }
    }
    emit(outcome, out / "oracle_compare.csv", table.str());
    emit(outcome, out / "convergence.csv", checks.render("convergence", cfg.hash));
    outcome.failures = checks.failures();
    return outcome;
}

CommandOutcome run_command(const std::string &name, const RunConfig &cfg) {
    if (name == "instrument-table") {
        return cmd_instrument_table(cfg);
    }
    if (name == "simulate") {
        return cmd_simulate(cfg);
    }
    if (name == "shift-check") {
        return cmd_shift_check(cfg);
    }
    if (name == "ensemble-stats") {
        return cmd_ensemble_stats(cfg);
    }
    if (name == "oracle-compare") {
        return cmd_oracle_compare(cfg);
    }
    throw ParseError("unknown subcommand '" + name + "'");
}

}  // namespace qnd
