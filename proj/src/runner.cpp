#include "riccati/runner.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>

#include "riccati/flow_engine.hpp"
#include "riccati/oracle.hpp"

namespace riccati {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

struct Artifact {
    std::string name;
    std::string content;
};

struct Computation {
    RunResult result;
    std::vector<Artifact> files;
};

std::string field_csv(const Grid1D& grid, const Field1D& f) {
    std::string out = "x,re,im\n";
    for (int i = 0; i < grid.size(); ++i) {
        out += fmt(grid.point(i)) + "," + fmt(f(i).real()) + "," + fmt(f(i).imag()) + "\n";
    }
    return out;
}

std::string kernel_csv(const Kernel2D& k) {
    const Grid1D& grid = k.grid();
    std::string out = "x,y,re,im\n";
    out.reserve(static_cast<std::size_t>(grid.size()) * grid.size() * 80);
    for (int i = 0; i < grid.size(); ++i) {
        const std::string x = fmt(grid.point(i)) + ",";
        for (int j = 0; j < grid.size(); ++j) {
            out += x + fmt(grid.point(j)) + "," + fmt(k(i, j).real()) + "," + fmt(k(i, j).imag()) + "\n";
        }
    }
    return out;
}

std::string matrix_csv(const Eigen::MatrixXcd& m) {
    std::string out = "i,j,re,im\n";
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            out += std::to_string(i) + "," + std::to_string(j) + "," + fmt(m(i, j).real()) + "," +
                   fmt(m(i, j).imag()) + "\n";
        }
    }
    return out;
}

std::string columns_csv(const std::vector<std::string>& headers,
                        const std::vector<Eigen::VectorXd>& columns) {
    std::string out;
    for (std::size_t c = 0; c < headers.size(); ++c) {
        out += (c ? "," : "") + headers[c];
    }
    out += "\n";
    const Eigen::Index rows = columns.empty() ? 0 : columns.front().size();
    for (Eigen::Index r = 0; r < rows; ++r) {
        for (std::size_t c = 0; c < columns.size(); ++c) {
            out += (c ? "," : "") + fmt(columns[c](r));
        }
        out += "\n";
    }
    return out;
}

Eigen::VectorXd grid_points(const Grid1D& grid) {
    Eigen::VectorXd x(grid.size());
    for (int i = 0; i < grid.size(); ++i) {
        x(i) = grid.point(i);
    }
    return x;
}

json optional_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

json query_json(const QueryRecord& q) {
    json j;
    j["t"] = q.t;
    j["fredholm_residual"] = optional_json(q.fredholm_residual);
    j["det2"] = q.det2 ? json{{"re", q.det2->real()}, {"im", q.det2->imag()}, {"abs", std::abs(*q.det2)}}
                       : json(nullptr);
    j["qprime_hs"] = optional_json(q.qprime_hs);
    j["boundary_mass"] = optional_json(q.boundary_mass);
    j["oracle_error"] = optional_json(q.oracle_error);
    j["pde_residual"] = optional_json(q.pde_residual);
    if (q.translation_deviation) {
        j["translation_deviation"] = *q.translation_deviation;
    }
    return j;
}

void add_det2_trace(Computation& c, const std::vector<Det2Sample>& trace) {
    json rows = json::array();
    Eigen::VectorXd t(static_cast<Eigen::Index>(trace.size()));
    Eigen::VectorXd mag(t.size()), arg(t.size()), hs(t.size());
    for (std::size_t i = 0; i < trace.size(); ++i) {
        const auto idx = static_cast<Eigen::Index>(i);
        t(idx) = trace[i].t;
        mag(idx) = std::abs(trace[i].det2);
        arg(idx) = std::arg(trace[i].det2);
        hs(idx) = trace[i].qprime_hs;
        rows.push_back({{"t", trace[i].t}, {"det2_abs", mag(idx)}, {"det2_arg", arg(idx)},
                        {"qprime_hs", hs(idx)}});
    }
    c.result.extra["det2_trace"] = rows;
    c.files.push_back({"plotdata_det2.csv", columns_csv({"t", "det2_abs", "det2_arg", "qprime_hs"},
                                                       {t, mag, arg, hs})});
}

// Sample times for the query list: each t plus t ± h for the time derivative.
std::vector<double> sample_times(const RunConfig& cfg) {
    std::set<double> times;
    for (double t : cfg.times.query) {
        times.insert(t);
        if (t - cfg.residual_h >= 0.0) {
            times.insert(t - cfg.residual_h);
            times.insert(t + cfg.residual_h);
        }
    }
    return {times.begin(), times.end()};
}

// Base/auxiliary states with g solved at every sample time.
std::map<double, FlowState> kernel_states(const FlowConfig& fc, const Kernel2D& g0,
                                          const std::vector<double>& times, bool general) {
    std::map<double, FlowState> out;
    if (general) {
        auto states = evolve_general_at(fc, g0, times);
        for (std::size_t i = 0; i < times.size(); ++i) {
            riccati_solution(states[i]);
            out.emplace(times[i], std::move(states[i]));
        }
    } else {
        for (double t : times) {
            FlowState s = evolve_fast_at(fc, g0, t);
            riccati_solution(s);
            out.emplace(t, std::move(s));
        }
    }
    return out;
}

void fill_kernel_diagnostics(QueryRecord& rec, const std::map<double, FlowState>& states,
                             const FlowConfig& fc, double h) {
    const FlowState& s = states.at(rec.t);
    rec.fredholm_residual = s.fredholm_residual;
    rec.det2 = s.det2;
    rec.qprime_hs = hs_norm(s.qprime);
    if (rec.t - h >= 0.0) {
        rec.pde_residual = pde_residual(*states.at(rec.t - h).g, *s.g, *states.at(rec.t + h).g, h, fc, rec.t);
    }
}

void compute_conv(const RunConfig& cfg, Computation& c) {
    const ConvModel m = make_conv_model(cfg);
    const Grid1D& grid = m.grid;
    if (const auto pole = scan_poles(m, cfg.times.t_final)) {
        std::ostringstream msg;
        msg << "mode k = " << pole->freq << " reaches its Riccati pole at t ≈ " << pole->critical_time;
        throw PoleCrossing(msg.str(), pole->freq, pole->critical_time);
    }
    FlowConfig fc(grid, m.d);
    fc.b = UnitCoupling{};
    fc.t_final = cfg.times.t_final;
    fc.dt = cfg.times.dt;
    fc.det2_stride = cfg.toggles.det2_stride;
    fc.fast_trace_samples = 8;

    std::vector<double> times = sample_times(cfg);
    // A pole between the last query and its +h sample drops that residual only.
    const bool pole_after = scan_poles(m, times.back()).has_value();
    if (pole_after) {
        times.pop_back();
    }
    const auto states = kernel_states(fc, translation_kernel(m.g0, grid), times, cfg.toggles.general_path);

    for (double t : cfg.times.query) {
        const auto start = Clock::now();
        QueryRecord rec;
        rec.t = t;
        if (pole_after && t == cfg.times.query.back() && t - cfg.residual_h >= 0.0) {
            const FlowState& s = states.at(t);
            rec.fredholm_residual = s.fredholm_residual;
            rec.det2 = s.det2;
            rec.qprime_hs = hs_norm(s.qprime);
        } else {
            fill_kernel_diagnostics(rec, states, fc, cfg.residual_h);
        }
        const Kernel2D& g = *states.at(t).g;
        const Field1D slice = g.values().col(grid.zero_index());
        rec.boundary_mass = boundary_mass(slice, grid);
        rec.translation_deviation = translation_invariance_deviation(g);

        const Field1D closed = conv_closed_form(m, t);
        std::vector<std::string> headers{"x", "g_re", "g_im", "closed_form_re", "closed_form_im"};
        std::vector<Eigen::VectorXd> cols{grid_points(grid), slice.real(), slice.imag(), closed.real(),
                                          closed.imag()};
        if (cfg.toggles.oracle) {
            oracle::DirectConvOptions opts;
            opts.dt = cfg.oracle.dt;
            opts.scheme = cfg.oracle.scheme == "spectral" ? oracle::ConvScheme::Spectral
                                                          : oracle::ConvScheme::Stencil;
            opts.stencil_order = cfg.oracle.stencil_order;
            const Field1D direct = oracle::direct_conv(m, t, opts);
            rec.oracle_error = oracle::relative_l2(slice, direct);
            headers.insert(headers.end(), {"oracle_re", "oracle_im"});
            cols.push_back(direct.real());
            cols.push_back(direct.imag());
        }
        const std::string tag = time_tag(t);
        c.files.push_back({"g_t" + tag + ".csv", field_csv(grid, slice)});
        c.files.push_back({"plotdata_conv_t" + tag + ".csv", columns_csv(headers, cols)});
        c.result.final_solution = slice;
        rec.wall_seconds = seconds_since(start);
        c.result.queries.push_back(rec);
    }
    add_det2_trace(c, states.at(cfg.times.query.back()).det2_trace);
}

void compute_corr(const RunConfig& cfg, Computation& c) {
    const CorrModel m = make_corr_model(cfg);
    const Grid1D& grid = m.grid;
    FlowConfig fc = corr_flow_config(m, cfg.times.t_final);
    fc.dt = cfg.times.dt;
    fc.det2_stride = cfg.toggles.det2_stride;
    fc.fast_trace_samples = 8;
    const auto states = kernel_states(fc, m.g0, sample_times(cfg), cfg.toggles.general_path);

    for (double t : cfg.times.query) {
        const auto start = Clock::now();
        QueryRecord rec;
        rec.t = t;
        fill_kernel_diagnostics(rec, states, fc, cfg.residual_h);
        const Kernel2D& g = *states.at(t).g;
        rec.boundary_mass = boundary_mass(g.values(), grid);

        const Field1D slice = g.values().col(grid.zero_index());
        std::vector<std::string> headers{"x", "g_re", "g_im"};
        std::vector<Eigen::VectorXd> cols{grid_points(grid), slice.real(), slice.imag()};
        if (cfg.toggles.oracle) {
            const Kernel2D direct = oracle::direct_corr(m, t, cfg.oracle.dt);
            rec.oracle_error = oracle::relative_l2(g.values(), direct.values());
            const Field1D dslice = direct.values().col(grid.zero_index());
            headers.insert(headers.end(), {"oracle_re", "oracle_im"});
            cols.push_back(dslice.real());
            cols.push_back(dslice.imag());
        }
        const std::string tag = time_tag(t);
        c.files.push_back({"g_t" + tag + ".csv", kernel_csv(g)});
        c.files.push_back({"plotdata_corr_y0_t" + tag + ".csv", columns_csv(headers, cols)});
        c.result.final_solution = g.values();
        rec.wall_seconds = seconds_since(start);
        c.result.queries.push_back(rec);
    }
    add_det2_trace(c, states.at(cfg.times.query.back()).det2_trace);
}

void compute_burgers(const RunConfig& cfg, Computation& c) {
    const BurgersModel m = make_burgers_model(cfg);
    const Grid1D& grid = m.grid;
    const double h = cfg.residual_h;
    const Field1D u0 = burgers_cole_hopf(m, 0.0).u();

    for (double t : cfg.times.query) {
        const auto start = Clock::now();
        QueryRecord rec;
        rec.t = t;
        const ColeHopfSolution sol = burgers_cole_hopf(m, t);
        const Field1D u = sol.u();
        const double pn = sol.p.norm();
        const double rank_one = (sol.p - sol.g.cwiseProduct(sol.q)).norm();
        rec.fredholm_residual = pn > 0.0 ? rank_one / pn : rank_one;
        rec.boundary_mass = boundary_mass(u, grid);
        if (t - h >= 0.0) {
            rec.pde_residual = burgers_residual(burgers_cole_hopf(m, t - h).u(), u,
                                                burgers_cole_hopf(m, t + h).u(), h, grid);
        }
        std::vector<std::string> headers{"x", "u", "q", "g"};
        std::vector<Eigen::VectorXd> cols{grid_points(grid), u.real(), sol.q.real(), sol.g.real()};
        if (cfg.toggles.oracle) {
            const Field1D direct = oracle::direct_burgers(grid, u0, t, cfg.oracle.dt);
            rec.oracle_error = oracle::relative_l2(u, direct);
            headers.push_back("u_oracle");
            cols.push_back(direct.real());
        }
        const std::string tag = time_tag(t);
        c.files.push_back({"g_t" + tag + ".csv", field_csv(grid, sol.g)});
        c.files.push_back({"plotdata_burgers_t" + tag + ".csv", columns_csv(headers, cols)});
        c.result.final_solution = u;
        rec.wall_seconds = seconds_since(start);
        c.result.queries.push_back(rec);
    }
}

void compute_matrix(const RunConfig& cfg, Computation& c) {
    const BlockSystem sys = make_block_system(cfg);
    const Eigen::MatrixXcd g0 = make_matrix_g0(cfg);
    const double dt = cfg.times.dt;
    const double h = cfg.residual_h;
    auto solve_at = [&](double t) { return project(integrate_frame(sys, g0, t, dt).back()).G; };

    for (double t : cfg.times.query) {
        const auto start = Clock::now();
        QueryRecord rec;
        rec.t = t;
        const FrameState frame = integrate_frame(sys, g0, t, dt).back();
        const Eigen::MatrixXcd G = project(frame).G;
        rec.fredholm_residual = (G * frame.Q - frame.P).norm() / std::max(1.0, frame.P.norm());
        rec.det2 = frame.Q.determinant();
        rec.qprime_hs = (frame.Q - Eigen::MatrixXcd::Identity(sys.k, sys.k)).norm();
        if (t - h >= 0.0) {
            const Eigen::MatrixXcd dG = (solve_at(t + h) - solve_at(t - h)) / (2.0 * h);
            const Eigen::MatrixXcd rhs = riccati_rhs(sys, t, G);
            const double denom = rhs.norm();
            rec.pde_residual = denom > 0.0 ? (dG - rhs).norm() / denom : (dG - rhs).norm();
        }
        if (cfg.toggles.oracle) {
            const Eigen::MatrixXcd direct = integrate_riccati_direct(sys, g0, t, dt).back().G;
            rec.oracle_error = oracle::relative_l2(G, direct);
        }
        c.files.push_back({"g_t" + time_tag(t) + ".csv", matrix_csv(G)});
        c.result.final_solution = G;
        rec.wall_seconds = seconds_since(start);
        c.result.queries.push_back(rec);
    }

    const auto frames = integrate_frame(sys, g0, cfg.times.t_final, dt);
    const auto count = static_cast<Eigen::Index>(frames.size());
    Eigen::VectorXd t(count), det_re(count), det_im(count), rc(count), gnorm(count);
    for (Eigen::Index i = 0; i < count; ++i) {
        const FrameState& f = frames[static_cast<std::size_t>(i)];
        const cplx det = f.Q.determinant();
        t(i) = f.t;
        det_re(i) = det.real();
        det_im(i) = det.imag();
        rc(i) = frame_rcond(f);
        gnorm(i) = project(f).G.norm();
    }
    c.files.push_back({"plotdata_matrix_trajectory.csv",
                       columns_csv({"t", "detQ_re", "detQ_im", "frame_rcond", "G_norm"},
                                   {t, det_re, det_im, rc, gnorm})});
}

Computation compute_all(const RunConfig& cfg) {
    Computation c;
    const auto start = Clock::now();
    try {
        validate(cfg);
        switch (cfg.model) {
            case ModelKind::Conv:
                compute_conv(cfg, c);
                break;
            case ModelKind::Corr:
                compute_corr(cfg, c);
                break;
            case ModelKind::Burgers:
                compute_burgers(cfg, c);
                break;
            case ModelKind::Matrix:
                compute_matrix(cfg, c);
                break;
        }
        for (const QueryRecord& q : c.result.queries) {
            if (q.oracle_error && !(*q.oracle_error <= cfg.oracle.tolerance)) {
                std::ostringstream msg;
                msg << "oracle error " << *q.oracle_error << " at t = " << q.t
                    << " exceeds tolerance " << cfg.oracle.tolerance;
                c.result.exit_code = kExitOracle;
                c.result.status = "oracle_disagreement";
                c.result.message = msg.str();
                break;
            }
        }
    } catch (const PoleCrossing& e) {
        c.result.exit_code = kExitPatchBreakdown;
        c.result.status = "pole_crossing";
        c.result.message = e.what();
        c.result.extra["breakdown"] = {{"critical_time", e.critical_time()}, {"freq", e.freq()}};
    } catch (const PatchBreakdown& e) {
        c.result.exit_code = kExitPatchBreakdown;
        c.result.status = "patch_breakdown";
        c.result.message = e.what();
        c.result.extra["breakdown"] = {{"time", e.time()}, {"det2_abs", e.det2_abs()}, {"rcond", e.rcond()}};
    } catch (const BlowUp& e) {
        c.result.exit_code = kExitInstability;
        c.result.status = "blow_up";
        c.result.message = e.what();
        c.result.extra["breakdown"] = {{"last_good_time", e.last_good_time()},
                                       {"estimated_time", e.estimated_time()}};
    } catch (const InstabilityError& e) {
        c.result.exit_code = kExitInstability;
        c.result.status = "instability";
        c.result.message = e.what();
        c.result.extra["breakdown"] = {{"last_good_time", e.last_good_time()}};
    } catch (const InadmissibleSymbol& e) {
        c.result.exit_code = kExitInstability;
        c.result.status = "overflow";
        c.result.message = e.what();
    } catch (const InvalidInput& e) {
        c.result.exit_code = kExitConfig;
        c.result.status = "config_invalid";
        c.result.message = e.what();
    }
    c.result.wall_seconds = seconds_since(start);
    return c;
}

json report_json(const RunConfig& cfg, const RunResult& r) {
    json j;
    j["config"] = to_json(cfg);
    j["status"] = r.status;
    j["exit_code"] = r.exit_code;
    if (!r.message.empty()) {
        j["message"] = r.message;
    }
    json queries = json::array();
    for (const QueryRecord& q : r.queries) {
        queries.push_back(query_json(q));
    }
    j["queries"] = queries;
    for (auto it = r.extra.begin(); it != r.extra.end(); ++it) {
        j[it.key()] = it.value();
    }
    return j;
}

json timing_json(const RunResult& r) {
    json q = json::array();
    for (const QueryRecord& rec : r.queries) {
        q.push_back({{"t", rec.t}, {"wall_seconds", rec.wall_seconds}});
    }
    return {{"total_wall_seconds", r.wall_seconds}, {"queries", q}};
}

}  // namespace

std::string time_tag(double t) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", t);
    std::string out;
    for (const char ch : std::string(buf)) {
        if (ch == '.') {
            out += 'p';
        } else if (ch == '-') {
            out += 'm';
        } else if (ch != '+') {
            out += ch;
        }
    }
    return out;
}

void write_atomic(const std::string& path, const std::string& content) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) {
            throw std::runtime_error("cannot write '" + tmp + "'");
        }
        out << content;
        out.flush();
        if (!out) {
            throw std::runtime_error("write to '" + tmp + "' failed");
        }
    }
    fs::rename(tmp, path);
}

RunResult compute(const RunConfig& cfg) { return compute_all(cfg).result; }

RunResult run(const RunConfig& cfg, std::ostream& log) {
    Computation c = compute_all(cfg);
    RunResult& r = c.result;
    if (r.exit_code == kExitConfig) {
        log << "config invalid: " << r.message << "\n";
        return r;
    }
    const fs::path dir(cfg.output_dir);
    fs::create_directories(dir);
    if (r.exit_code == kExitOk || r.exit_code == kExitOracle) {
        for (const Artifact& a : c.files) {
            write_atomic((dir / a.name).string(), a.content);
        }
    }
    write_atomic((dir / "report.json").string(), report_json(cfg, r).dump(2) + "\n");
    write_atomic((dir / "timing.json").string(), timing_json(r).dump(2) + "\n");

    log << to_string(cfg.model) << ": " << r.status;
    if (!r.message.empty()) {
        log << " (" << r.message << ")";
    }
    log << "\n";
    for (const QueryRecord& q : r.queries) {
        log << "  t = " << q.t;
        if (q.fredholm_residual) log << "  residual = " << *q.fredholm_residual;
        if (q.det2) log << "  |det2| = " << std::abs(*q.det2);
        if (q.pde_residual) log << "  pde_residual = " << *q.pde_residual;
        if (q.oracle_error) log << "  oracle_error = " << *q.oracle_error;
        log << "\n";
    }
    log << "  outputs in " << dir.string() << "\n";
    return r;
}

int sweep(const RunConfig& cfg, const std::string& parameter, const std::vector<double>& values,
          const std::string& out_dir, std::ostream& log) {
    if (values.empty()) {
        log << "config invalid: sweep needs at least one value\n";
        return kExitConfig;
    }
    std::vector<RunConfig> configs;
    try {
        for (std::size_t i = 0; i < values.size(); ++i) {
            RunConfig c = cfg;
            set_parameter(c, parameter, values[i]);
            char name[32];
            std::snprintf(name, sizeof name, "run_%03zu", i);
            c.output_dir = (fs::path(out_dir) / name).string();
            configs.push_back(std::move(c));
        }
    } catch (const InvalidInput& e) {
        log << "config invalid: " << e.what() << "\n";
        return kExitConfig;
    }

    std::vector<RunResult> results;
    for (const RunConfig& c : configs) {
        results.push_back(run(c, log));
        if (results.back().exit_code == kExitConfig) {
            return kExitConfig;
        }
    }

    const std::size_t count = values.size();
    std::vector<std::optional<double>> metric(count);
    for (std::size_t i = 0; i < count; ++i) {
        const RunResult& r = results[i];
        if (cfg.toggles.oracle) {
            double worst = -1.0;
            for (const QueryRecord& q : r.queries) {
                if (q.oracle_error) {
                    worst = std::max(worst, *q.oracle_error);
                }
            }
            if (worst >= 0.0) {
                metric[i] = worst;
            }
        } else if (i + 1 < count) {
            const RunResult& next = results[i + 1];
            const bool usable = (r.exit_code == kExitOk || r.exit_code == kExitOracle) &&
                                (next.exit_code == kExitOk || next.exit_code == kExitOracle) &&
                                r.final_solution.size() > 0 &&
                                r.final_solution.rows() == next.final_solution.rows() &&
                                r.final_solution.cols() == next.final_solution.cols();
            if (usable) {
                metric[i] = oracle::relative_l2(r.final_solution, next.final_solution);
            }
        }
    }
    std::vector<std::optional<double>> order(count);
    for (std::size_t i = 0; i + 1 < count; ++i) {
        if (metric[i] && metric[i + 1] && *metric[i] > 0.0 && *metric[i + 1] > 0.0 &&
            values[i] > 0.0 && values[i + 1] > 0.0 && values[i] != values[i + 1]) {
            order[i + 1] = std::log(*metric[i] / *metric[i + 1]) / std::log(values[i] / values[i + 1]);
        }
    }

    std::string csv = "value,metric,observed_order,status\n";
    json rows = json::array();
    for (std::size_t i = 0; i < count; ++i) {
        csv += fmt(values[i]) + "," + (metric[i] ? fmt(*metric[i]) : "") + "," +
               (order[i] ? fmt(*order[i]) : "") + "," + results[i].status + "\n";
        rows.push_back({{"value", values[i]},
                        {"metric", optional_json(metric[i])},
                        {"observed_order", optional_json(order[i])},
                        {"status", results[i].status},
                        {"exit_code", results[i].exit_code},
                        {"output_dir", configs[i].output_dir}});
    }
    json summary{{"parameter", parameter},
                 {"metric", cfg.toggles.oracle ? "oracle_error" : "relative_change_to_next"},
                 {"runs", rows}};
    for (std::size_t i = 1; i < count; ++i) {
        if (results[i].exit_code == kExitPatchBreakdown && results[i - 1].exit_code != kExitPatchBreakdown &&
            results[i - 1].exit_code != kExitInstability) {
            json bracket{{"lower", values[i - 1]}, {"upper", values[i]}};
            const json& extra = results[i].extra;
            if (extra.contains("breakdown") && extra["breakdown"].contains("critical_time")) {
                bracket["critical_time"] = extra["breakdown"]["critical_time"];
            } else if (extra.contains("breakdown") && extra["breakdown"].contains("time")) {
                bracket["breakdown_time"] = extra["breakdown"]["time"];
            }
            summary["critical_time_bracket"] = bracket;
            log << "critical time bracketed in [" << values[i - 1] << ", " << values[i] << "]\n";
            break;
        }
    }
    fs::create_directories(out_dir);
    write_atomic((fs::path(out_dir) / "convergence.csv").string(), csv);
    write_atomic((fs::path(out_dir) / "sweep.json").string(), summary.dump(2) + "\n");
    return kExitOk;
}

}  // namespace riccati
