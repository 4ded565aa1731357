#include "grushin/runner.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <functional>
#include <limits>
#include <mutex>
#include <numbers>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "grushin/eigen_analysis.hpp"
#include "grushin/errors.hpp"
#include "grushin/io.hpp"
#include "grushin/rng.hpp"

namespace grushin {

using nlohmann::json;

Command command_from_string(const std::string& name) {
    if (name == "forward") return Command::Forward;
    if (name == "eigen-scaling") return Command::EigenScaling;
    if (name == "reconstruct") return Command::Reconstruct;
    if (name == "stability-sweep") return Command::StabilitySweep;
    if (name == "check-class") return Command::CheckClass;
    if (name == "harnack") return Command::Harnack;
    throw ConfigError("unknown command: " + name);
}

std::string command_to_string(Command cmd) {
    switch (cmd) {
    case Command::Forward: return "forward";
    case Command::EigenScaling: return "eigen-scaling";
    case Command::Reconstruct: return "reconstruct";
    case Command::StabilitySweep: return "stability-sweep";
    case Command::CheckClass: return "check-class";
    case Command::Harnack: return "harnack";
    }
    return "?";
}

ModeStack make_stack(std::shared_ptr<const Grid1D> grid, std::shared_ptr<const SpectralBasisY> basis,
                     const std::vector<ModeInitConfig>& modes) {
    ModeStack stack;
    stack.grid = grid;
    stack.basis = std::move(basis);
    for (const auto& mc : modes) {
        std::vector<double> mode(grid->n_nodes());
        for (int i = 0; i < grid->n_nodes(); ++i)
            mode[i] = mc.scale * evaluate_initial_profile(mc.profile, grid->nodes[i]);
        stack.n_indices.push_back(mc.n);
        stack.modes.push_back(std::move(mode));
    }
    return stack;
}

Lab make_lab(const ExperimentConfig& cfg) {
    Lab lab;
    lab.grid = std::make_shared<const Grid1D>(
        build_grid(cfg.geometry.x_min, cfg.geometry.x_max, cfg.discretization.n_cells));
    lab.basis = std::make_shared<const SpectralBasisY>(
        build_basis(cfg.geometry.L2, cfg.discretization.N_max, cfg.discretization.n_y_quad));
    lab.b = std::make_shared<const CoefficientField>(
        make_coefficient(lab.grid, cfg.geometry.support, cfg.coeff_b, cfg.physics.m, cfg.physics.M,
                         cfg.physics.L_b));
    lab.btilde = std::make_shared<const CoefficientField>(
        make_coefficient(lab.grid, cfg.geometry.support, cfg.coeff_btilde, cfg.physics.m,
                         cfg.physics.M, cfg.physics.L_b));
    lab.data = make_stack(lab.grid, lab.basis, cfg.initial_modes);
    return lab;
}

int pick_store_stride(long n_steps, long j_snapshot, int requested, int target) {
    if (requested > 0) return requested;
    long stride = std::max(1L, n_steps / std::max(1, target));
    while (stride > 1 && j_snapshot % stride != 0) --stride;
    return static_cast<int>(stride);
}

StabilityProblem stability_problem_from(const ExperimentConfig& cfg, const Lab& lab) {
    StabilityProblem p;
    p.grid = lab.grid;
    p.basis = lab.basis;
    p.b = lab.b;
    p.btilde = lab.btilde;
    p.u0 = lab.data;
    p.u0tilde = lab.data;
    p.N = cfg.protocol.N;
    p.T = cfg.protocol.T;
    p.T1 = cfg.protocol.T1;
    p.t1 = cfg.protocol.t1;
    p.omega1 = cfg.geometry.omega1;
    p.gamma = cfg.physics.gamma;
    p.s = cfg.physics.s;
    p.dt = cfg.discretization.dt;
    p.K1 = cfg.protocol.K1;
    p.m = cfg.physics.m;
    p.scheme = cfg.protocol.scheme;
    p.heat_steps = cfg.discretization.heat_steps;

    const long n_steps = std::max(1L, std::lround(p.T / p.dt));
    const long j_snap = std::lround(p.T1 / (p.T / n_steps));
    p.store_stride = pick_store_stride(n_steps, j_snap, cfg.discretization.store_stride);
    return p;
}

namespace {

void parallel_for(int count, int threads, const std::function<void(int)>& fn) {
    threads = std::max(1, std::min(threads, count));
    if (threads == 1) {
        for (int i = 0; i < count; ++i) fn(i);
        return;
    }
    std::exception_ptr first_error;
    std::mutex error_mutex;
    std::vector<std::thread> pool;
    std::atomic<int> next{0};
    for (int t = 0; t < threads; ++t) {
        pool.emplace_back([&] {
            for (;;) {
                const int i = next.fetch_add(1);
                if (i >= count) return;
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(error_mutex);
                    if (!first_error) first_error = std::current_exception();
                }
            }
        });
    }
    for (auto& th : pool) th.join();
    if (first_error) std::rethrow_exception(first_error);
}

std::string format_double(double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

ProfileSpec jitter_profile(const ProfileSpec& p, double jitter, CounterRng& rng) {
    if (p.kind != ProfileSpec::Kind::Bump || jitter == 0.0) {
        // Draws are consumed regardless so run streams stay aligned.
        rng.uniform01();
        rng.uniform01();
        rng.uniform01();
        return p;
    }
    const double center = p.bump.center + jitter * p.bump.width * rng.uniform(-1.0, 1.0);
    const double width = p.bump.width * (1.0 + 0.5 * jitter * rng.uniform(-1.0, 1.0));
    const double amplitude = p.bump.amplitude * (1.0 + jitter * rng.uniform(-1.0, 1.0));
    return ProfileSpec::bump_profile(center, width, amplitude);
}

json stability_report_json(const StabilityReport& r) {
    json j;
    j["N"] = r.N;
    j["gamma"] = r.gamma;
    j["T"] = r.T;
    j["T1"] = r.T1;
    j["lhs"] = r.lhs;
    j["lhs_weighted"] = r.lhs_weighted;
    j["obs_term"] = r.obs_term;
    j["snapshot_term"] = r.snapshot_term;
    j["norm_sq"] = r.norm_sq;
    j["u0_norm_sq"] = r.u0_norm_sq;
    j["ratio"] = r.ratio;
    j["lambda_N"] = r.lambda_N;
    j["p_gamma"] = r.p_gamma;
    j["seed"] = r.seed;
    j["membership_ok"] = r.membership_ok;
    j["K1_max"] = r.K1_max;
    j["t_snapshot"] = r.t_snapshot;
    j["violation_flag"] = r.violation_flag;
    return j;
}

void run_forward(const ExperimentConfig& cfg, ArtifactWriter& writer) {
    const Lab lab = make_lab(cfg);
    const long n_steps = std::max(1L, std::lround(cfg.protocol.T / cfg.discretization.dt));
    const int stride = pick_store_stride(n_steps, n_steps, cfg.discretization.store_stride);

    json jmodes = json::array();
    for (std::size_t k = 0; k < lab.data.modes.size(); ++k) {
        const int n = lab.data.n_indices[k];
        const ModeOperator op =
            assemble_operator(lab.grid, cfg.physics.gamma, lab.basis->mu[n - 1], lab.b);
        const ModeTrajectory traj = solve_mode(lab.data.modes[k], SourceFn{}, op, cfg.protocol.T,
                                               cfg.discretization.dt, cfg.protocol.scheme, stride);
        std::vector<double> norms(traj.times.size());
        for (std::size_t j = 0; j < traj.times.size(); ++j)
            norms[j] = l2_norm(traj.states[j], *lab.grid);
        jmodes.push_back({{"n", n}, {"times", traj.times}, {"l2_norms", norms}});

        if (cfg.output.write_trajectories) {
            std::ostringstream csv;
            csv << "t,x,value\n";
            for (std::size_t j = 0; j < traj.times.size(); ++j)
                for (int i = 0; i < lab.grid->n_nodes(); ++i)
                    csv << format_double(traj.times[j]) << ',' << format_double(lab.grid->nodes[i])
                        << ',' << format_double(traj.states[j][i]) << '\n';
            writer.write("mode_" + std::to_string(n) + ".csv", csv.str());
        }
    }
    json out;
    out["schema_version"] = 1;
    out["modes"] = jmodes;
    writer.write("forward.json", out.dump(2) + "\n");
}

void run_eigen_scaling(const ExperimentConfig& cfg, ArtifactWriter& writer) {
    const auto grid = std::make_shared<const Grid1D>(
        build_grid(cfg.geometry.x_min, cfg.geometry.x_max, cfg.discretization.n_cells));
    const auto coeff = std::make_shared<const CoefficientField>(
        make_coefficient(grid, cfg.geometry.support, cfg.coeff_b, cfg.physics.m, cfg.physics.M,
                         cfg.physics.L_b));
    const int n_hi = cfg.sweeps.n_hi;
    const SpectralBasisY basis =
        build_basis(cfg.geometry.L2, n_hi, std::max(cfg.discretization.n_y_quad, 4 * n_hi));

    std::vector<int> n_list;
    for (int n = cfg.sweeps.n_lo; n <= n_hi; ++n) n_list.push_back(n);
    const ScalingFitReport rep = lambda_sweep(cfg.physics.gamma, coeff, basis, n_list, grid);

    json j;
    j["schema_version"] = 1;
    j["gamma"] = rep.gamma;
    j["slope"] = rep.slope;
    j["slope_theory"] = rep.slope_theory;
    j["c_star_lo"] = rep.c_star_lo;
    j["c_star_hi"] = rep.c_star_hi;
    j["p_gamma"] = rep.p_gamma;
    j["r_squared"] = rep.r_squared;
    j["fit_valid"] = rep.fit_valid;
    j["n"] = rep.n_list;
    j["mu"] = rep.mu_list;
    j["lambda"] = rep.lambda_list;
    writer.write("scaling.json", j.dump(2) + "\n");

    if (cfg.output.write_csv) {
        std::ostringstream csv;
        csv << "n,mu_n,lambda_n,ratio\n";
        for (std::size_t i = 0; i < rep.n_list.size(); ++i)
            csv << rep.n_list[i] << ',' << format_double(rep.mu_list[i]) << ','
                << format_double(rep.lambda_list[i]) << ','
                << format_double(rep.lambda_list[i] / std::pow(rep.mu_list[i], rep.slope_theory))
                << '\n';
        writer.write("scaling.csv", csv.str());
    }
}

double data_norm(const ExperimentConfig& cfg, const Lab& lab, const ModeStack& stack) {
    std::vector<ModeOperator> ops;
    ops.reserve(stack.n_indices.size());
    for (int n : stack.n_indices)
        ops.push_back(assemble_operator(lab.grid, cfg.physics.gamma, lab.basis->mu[n - 1], lab.btilde));
    const double s = cfg.physics.s;
    const long sr = std::lround(s);
    if (std::abs(s - static_cast<double>(sr)) < 1e-12 && sr >= 0 && sr % 2 == 0)
        return fractional_norm_via_powers(stack, static_cast<int>(sr), ops);
    std::vector<ModeSpectrum> spectra;
    spectra.reserve(ops.size());
    for (const auto& op : ops) spectra.push_back(eigendecompose(op, op.dim()));
    return fractional_norm(stack, s, spectra);
}

void run_check_class(const ExperimentConfig& cfg, ArtifactWriter& writer) {
    const Lab lab = make_lab(cfg);
    const double norm = data_norm(cfg, lab, lab.data);
    const ClassMembershipReport rep = check_class_membership(
        lab.data, norm, cfg.protocol.N, lab.basis->mu[cfg.protocol.N - 1], cfg.protocol.K1,
        cfg.protocol.t1, cfg.protocol.T1, cfg.physics.s, cfg.physics.m,
        cfg.geometry.support.delta, cfg.physics.gamma, cfg.geometry.support,
        cfg.discretization.heat_steps);

    json j;
    j["schema_version"] = 1;
    j["N"] = rep.N;
    j["K1"] = rep.K1;
    j["t1"] = rep.t1;
    j["T1"] = rep.T1;
    j["s"] = rep.s;
    j["nonneg_ok"] = rep.nonneg_ok;
    j["lhs"] = rep.lhs;
    j["rhs"] = rep.rhs;
    j["K1_max"] = rep.K1_max;
    j["norm"] = rep.norm;
    j["member"] = rep.member;
    writer.write("class_membership.json", j.dump(2) + "\n");
}

void run_harnack(const ExperimentConfig& cfg, ArtifactWriter& writer, std::uint64_t master_seed) {
    const auto parent = build_grid(cfg.geometry.x_min, cfg.geometry.x_max, cfg.discretization.n_cells);
    const Grid1D sub = subgrid_aligned(parent, cfg.geometry.support.lo, cfg.geometry.support.hi);
    const auto sub_ptr = std::make_shared<const Grid1D>(sub);
    const ModeOperator lap = assemble_laplacian(sub_ptr);

    const double quarter = 0.25 * (sub.b - sub.a);
    const SubdomainSpec V{sub.a + quarter, sub.b - quarter, cfg.geometry.support.delta};
    const double t1 = cfg.protocol.t1;
    const double T1 = cfg.protocol.T1;

    json jruns = json::array();
    double min_ratio = std::numeric_limits<double>::infinity();
    for (int r = 0; r < cfg.ensemble.count; ++r) {
        CounterRng rng = CounterRng::for_run(master_seed, static_cast<std::uint64_t>(r));
        std::vector<double> u0(sub.n_nodes());
        const double floor_level = 0.05;
        const double c1 = rng.uniform(sub.a + 0.2 * (sub.b - sub.a), sub.b - 0.2 * (sub.b - sub.a));
        const double w1 = rng.uniform(0.15, 0.35) * (sub.b - sub.a);
        const double a1 = rng.uniform(0.5, 1.5);
        const double c2 = rng.uniform(sub.a + 0.2 * (sub.b - sub.a), sub.b - 0.2 * (sub.b - sub.a));
        const double w2 = rng.uniform(0.1, 0.25) * (sub.b - sub.a);
        const double a2 = rng.uniform(0.2, 0.8);
        for (int i = 0; i < sub.n_nodes(); ++i) {
            const double x = sub.nodes[i];
            auto bump = [](double t) { return std::abs(t) < 1.0 ? std::exp(1.0 - 1.0 / (1.0 - t * t)) : 0.0; };
            u0[i] = floor_level + a1 * bump((x - c1) / w1) + a2 * bump((x - c2) / w2);
        }
        const ModeTrajectory traj =
            solve_mode(u0, SourceFn{}, lap, T1, cfg.discretization.dt, Scheme::BackwardEuler, 1);
        const HarnackReport rep = harnack_ratio(traj, lap, sub, V, t1, T1);
        min_ratio = std::min(min_ratio, rep.ratio);
        jruns.push_back({{"run", r},
                         {"ratio", rep.ratio},
                         {"inf_late", rep.inf_late},
                         {"sup_early", rep.sup_early},
                         {"unbounded", rep.unbounded}});
    }

    // Eigenfunction control case: the sampled ground sine is the exact
    // discrete eigenvector, so the ratio has a closed form on the V nodes.
    const double length = sub.b - sub.a;
    std::vector<double> sine(sub.n_nodes());
    for (int i = 0; i < sub.n_nodes(); ++i)
        sine[i] = std::sin(std::numbers::pi * (sub.nodes[i] - sub.a) / length);
    const ModeTrajectory eig_traj =
        solve_mode(sine, SourceFn{}, lap, T1, cfg.discretization.dt, Scheme::BackwardEuler, 1);
    const HarnackReport eig = harnack_ratio(eig_traj, lap, sub, V, t1, T1);
    const IndexRange vr = restrict_to(sub, V.lo, V.hi);
    double vmin = std::numeric_limits<double>::infinity(), vmax = 0.0;
    for (int i = vr.first; i < vr.last; ++i) {
        vmin = std::min(vmin, sine[i]);
        vmax = std::max(vmax, sine[i]);
    }
    const double lambda1 = std::pow(std::numbers::pi / length, 2.0);
    const double closed_form = std::exp(-lambda1 * (T1 - t1)) * vmin / vmax;

    json j;
    j["schema_version"] = 1;
    j["t1"] = t1;
    j["T1"] = T1;
    j["V"] = {{"lo", V.lo}, {"hi", V.hi}};
    j["runs"] = jruns;
    j["min_ratio"] = min_ratio;
    j["eigen_case"] = {{"ratio", eig.ratio},
                       {"closed_form", closed_form},
                       {"rel_err", std::abs(eig.ratio - closed_form) / closed_form}};
    writer.write("harnack.json", j.dump(2) + "\n");
}

void run_reconstruct(const ExperimentConfig& cfg, ArtifactWriter& writer, std::uint64_t master_seed) {
    const Lab lab = make_lab(cfg);
    const int N = cfg.protocol.N;
    const auto* modeN = lab.data.mode_for(N);
    if (!modeN)
        throw ConfigError("reconstruct: initial data has no mode N = " + std::to_string(N));

    const double mu = lab.basis->mu[N - 1];
    const ModeOperator op_b = assemble_operator(lab.grid, cfg.physics.gamma, mu, lab.b);
    const ModeOperator op_bt = assemble_operator(lab.grid, cfg.physics.gamma, mu, lab.btilde);

    const double T1 = cfg.protocol.T1;
    const long n_steps = std::max(1L, std::lround(T1 / cfg.discretization.dt));
    const int stride = pick_store_stride(n_steps, n_steps, cfg.discretization.store_stride);

    const ModeTrajectory tu = solve_mode(*modeN, SourceFn{}, op_b, T1, cfg.discretization.dt,
                                         cfg.protocol.scheme, stride);
    const ModeTrajectory tt = solve_mode(*modeN, SourceFn{}, op_bt, T1, cfg.discretization.dt,
                                         cfg.protocol.scheme, stride);

    const int jT = tu.index_of_time(T1);
    ModeSnapshot measured{tu.states[jT], tu.dstates[jT], tu.times[jT]};
    const double noise = cfg.ensemble.noise_level;
    if (noise > 0.0) {
        measured.state = noise_inject(measured.state, noise, CounterRng::for_run(master_seed, 1000).seed());
        measured.dstate = noise_inject(measured.dstate, noise, CounterRng::for_run(master_seed, 1001).seed());
    }

    const ReconstructionResult rec =
        reconstruct_coefficient(measured, tt, op_bt, cfg.geometry.support);

    double sup_err = 0.0, l2_err = 0.0, true_l2 = 0.0;
    for (int i = rec.window.first; i < rec.window.last; ++i) {
        const double truth = lab.b->samples[i] - lab.btilde->samples[i];
        const double err = rec.diff[i] - truth;
        sup_err = std::max(sup_err, std::abs(err));
        l2_err += err * err;
        true_l2 += truth * truth;
    }
    l2_err = std::sqrt(lab.grid->h * l2_err);
    true_l2 = std::sqrt(lab.grid->h * true_l2);

    json j;
    j["schema_version"] = 1;
    j["N"] = N;
    j["T1"] = T1;
    j["noise_level"] = noise;
    j["sup_error"] = sup_err;
    j["l2_error"] = l2_err;
    j["true_diff_l2"] = true_l2;
    j["identity_residual_sup"] = rec.residual_sup;
    writer.write("reconstruction.json", j.dump(2) + "\n");

    if (cfg.output.write_csv) {
        std::ostringstream csv;
        csv << "x,true_diff,estimate\n";
        for (int i = 0; i < lab.grid->n_nodes(); ++i)
            csv << format_double(lab.grid->nodes[i]) << ','
                << format_double(lab.b->samples[i] - lab.btilde->samples[i]) << ','
                << format_double(rec.diff[i]) << '\n';
        writer.write("reconstruction.csv", csv.str());
    }
}

void run_stability_sweep(const ExperimentConfig& cfg, ArtifactWriter& writer,
                         std::uint64_t master_seed, int threads) {
    const auto& N_list = cfg.sweeps.N_list;
    if (cfg.ensemble.count % static_cast<int>(N_list.size()) != 0)
        throw ConfigError("stability-sweep: ensemble count must be divisible by the N_list length");
    const int per_N = cfg.ensemble.count / static_cast<int>(N_list.size());

    std::vector<StabilityReport> reports(cfg.ensemble.count);
    parallel_for(cfg.ensemble.count, threads, [&](int r) {
        CounterRng rng = CounterRng::for_run(master_seed, static_cast<std::uint64_t>(r));
        ExperimentConfig run_cfg = cfg;
        run_cfg.protocol.N = N_list[r / per_N];
        run_cfg.coeff_b = jitter_profile(cfg.coeff_b, cfg.ensemble.jitter, rng);
        run_cfg.coeff_btilde = jitter_profile(cfg.coeff_btilde, cfg.ensemble.jitter, rng);
        const Lab lab = make_lab(run_cfg);
        const StabilityProblem problem = stability_problem_from(run_cfg, lab);
        reports[r] = stability_ratio(problem, rng.seed());
    });

    json jr = json::array();
    for (const auto& rep : reports) jr.push_back(stability_report_json(rep));
    json j;
    j["schema_version"] = 1;
    j["gamma"] = cfg.physics.gamma;
    j["master_seed"] = master_seed;
    j["runs"] = jr;
    writer.write("stability.json", j.dump(2) + "\n");

    if (cfg.output.write_csv) {
        std::ostringstream csv;
        csv << "run,N,seed,lhs,obs_term,snapshot_term,norm_sq,ratio,lambda_N\n";
        for (std::size_t r = 0; r < reports.size(); ++r) {
            const auto& rep = reports[r];
            csv << r << ',' << rep.N << ',' << rep.seed << ',' << format_double(rep.lhs) << ','
                << format_double(rep.obs_term) << ',' << format_double(rep.snapshot_term) << ','
                << format_double(rep.norm_sq) << ',' << format_double(rep.ratio) << ','
                << format_double(rep.lambda_N) << '\n';
        }
        writer.write("stability.csv", csv.str());
    }
}

} // namespace

std::vector<std::string> run_command(const ExperimentConfig& cfg, Command cmd, const RunOptions& opts) {
    const std::string out_dir = opts.out_dir.empty() ? cfg.output.directory : opts.out_dir;
    const std::uint64_t seed = opts.seed.value_or(cfg.ensemble.master_seed);

    ArtifactWriter writer(out_dir);
    writer.write("resolved_config.json", resolved_config_json(cfg));

    switch (cmd) {
    case Command::Forward: run_forward(cfg, writer); break;
    case Command::EigenScaling: run_eigen_scaling(cfg, writer); break;
    case Command::Reconstruct: run_reconstruct(cfg, writer, seed); break;
    case Command::StabilitySweep: run_stability_sweep(cfg, writer, seed, opts.threads); break;
    case Command::CheckClass: run_check_class(cfg, writer); break;
    case Command::Harnack: run_harnack(cfg, writer, seed); break;
    }

    writer.write_manifest(command_to_string(cmd));
    auto paths = writer.artifact_paths();
    paths.push_back(out_dir + "/manifest.json");
    return paths;
}

} // namespace grushin
