// recomb: experiment driver for the nonlinear recombination process.
//
// Subcommands: check (config + frame-system analysis), simulate (exact
// integration to the predicted limit), particle (mean-field ensemble),
// reach (recombination closure of a seed word set).
//
// Exit codes: 0 success, 2 config/usage error, 3 numerical failure,
// 4 state cap exceeded.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "recomb/config.hpp"
#include "recomb/dynamics.hpp"
#include "recomb/errors.hpp"
#include "recomb/particle.hpp"
#include "recomb/reach.hpp"

namespace {

namespace fs = std::filesystem;
using namespace recomb;

/// 17 significant digits: round-trip safe for 64-bit floats, and fixed so
/// reruns are byte-identical.
std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::ofstream open_out(const fs::path& path) {
    std::ofstream out(path);
    if (!out) throw std::invalid_argument("cannot write " + path.string());
    return out;
}

/// One "word probability" line per state, in state-index order.
void write_measure(const fs::path& path, const ExperimentConfig& cfg, const DenseMeasure& mu,
                   const std::string& comment = "") {
    std::ofstream out = open_out(path);
    if (!comment.empty()) out << "# " << comment << "\n";
    const ProductSpace& space = mu.space();
    for (StateIndex s = 0; s < space.state_count(); ++s) {
        out << format_word(cfg, space.decode(s)) << ' ' << fmt(mu[s]) << '\n';
    }
}

void write_trajectory(const fs::path& path, std::span<const TrajectoryRecord> records) {
    std::ofstream out = open_out(path);
    out << "t,entropy,max_residual,tv_to_limit,max_separation_violation,support_size\n";
    for (const TrajectoryRecord& r : records) {
        out << fmt(r.time) << ',' << fmt(r.entropy) << ',' << fmt(r.max_residual) << ','
            << fmt(r.tv_to_limit) << ',' << fmt(r.separation_violation) << ','
            << r.support_size << '\n';
    }
}

void write_events(const fs::path& path, const EventLog& log) {
    std::ofstream out = open_out(path);
    out << "time,k,l,frame_id,accepted\n";
    for (const ParticleEvent& ev : log.events) {
        out << fmt(ev.time) << ',' << ev.particle << ',' << ev.partner << ','
            << (ev.frame_index + 1) << ',' << (ev.accepted ? 1 : 0) << '\n';
    }
}

std::string classes_text(const std::vector<SiteSet>& classes) {
    std::string out;
    for (std::size_t j = 0; j < classes.size(); ++j) {
        if (j) out += ',';
        out += '{';
        for (std::size_t i = 0; i < classes[j].size(); ++i) {
            if (i) out += ',';
            out += std::to_string(classes[j][i] + 1);
        }
        out += '}';
    }
    return out;
}

struct LoadedExperiment {
    ExperimentConfig cfg;
    SpacePtr space;
    FrameSystem fs;
    Legend legend;
    DenseMeasure mu0;
};

LoadedExperiment load_experiment(const std::string& config_path) {
    ExperimentConfig cfg = load_config(config_path);
    SpacePtr space = build_space(cfg);
    FrameSystem fs = build_frame_system(cfg, space);
    Legend legend = build_legend(cfg, fs);
    DenseMeasure mu0 = build_initial_measure(cfg, space, &std::cerr);
    return {std::move(cfg), std::move(space), std::move(fs), std::move(legend), std::move(mu0)};
}

int run_check(const std::string& config_path) {
    LoadedExperiment ex = load_experiment(config_path);
    std::cout << "space: sites=" << ex.space->site_count()
              << " states=" << ex.space->state_count() << "\n";
    std::cout << "frames: " << ex.fs.frame_count() << "\n";

    const auto classes = equivalence_classes(ex.fs);
    if (const auto pair = find_unseparated_pair(ex.fs)) {
        std::cout << "T0: false; witness (" << pair->first + 1 << "," << pair->second + 1
                  << "); classes: " << classes_text(classes) << "\n";
    } else {
        std::cout << "T0: true; classes: " << classes_text(classes) << "\n";
    }

    const QuotientSystem q = quotient_system(ex.fs);
    std::cout << "quotient: sites=" << q.space->site_count()
              << " states=" << q.space->state_count()
              << " T0=" << (is_t0(q.system) ? "true" : "false") << "\n";
    std::cout << "legend: valid (" << (ex.cfg.legend.uniform ? "uniform" : "explicit matrices")
              << "); total max rate " << fmt(ex.legend.total_max_rate()) << "\n";
    return 0;
}

int run_simulate(const std::string& config_path, double t_end, double dt, bool dt_given,
                 double tv_tol, const std::string& out_override) {
    LoadedExperiment ex = load_experiment(config_path);
    IntegratorConfig ic = ex.cfg.integrator;
    if (dt_given) ic.step = dt;

    RecombinationFlow flow(ex.fs, ex.legend);
    const ConvergenceResult res = run_to_convergence(flow, ex.mu0, tv_tol, t_end, ic);

    const fs::path dir = out_override.empty() ? fs::path(ex.cfg.output_dir)
                                              : fs::path(out_override);
    fs::create_directories(dir);
    write_trajectory(dir / "trajectory.csv", res.records);
    write_measure(dir / "final_measure.txt", ex.cfg, res.final_measure);

    const char* target_kind =
        is_t0(ex.fs) ? "product of site marginals" : "block product over classes";
    std::cout << "target: " << target_kind << "\n";
    if (res.converged) {
        std::cout << "converged: true at t=" << fmt(res.time) << " tv=" << fmt(res.final_tv)
                  << "\n";
    } else {
        std::cout << "converged: false at horizon t=" << fmt(res.time)
                  << " tv=" << fmt(res.final_tv) << "\n";
    }
    std::cout << "rows: " << res.records.size() << "\n";
    return 0;
}

int run_particle(const std::string& config_path, std::uint64_t n, bool n_given,
                 std::uint64_t seed, bool seed_given, double t_end, bool t_end_given,
                 const std::string& out_override) {
    LoadedExperiment ex = load_experiment(config_path);
    if (!n_given) n = ex.cfg.particle.n;
    if (n == 0) throw std::invalid_argument("particle: give --n or set particle.n");
    if (!seed_given) seed = ex.cfg.particle.seed;

    const std::vector<double>& snaps = ex.cfg.particle.snapshot_times;
    if (!t_end_given) {
        if (snaps.empty()) {
            throw std::invalid_argument("particle: give --t-end or set particle.snapshot_times");
        }
        t_end = snaps.back();
    }

    ParticleEnsemble ens(ex.fs, ex.legend, ex.mu0, n, seed);
    const ParticleRunResult res = ens.run(t_end, snaps, /*keep_log=*/true);

    const fs::path dir = out_override.empty() ? fs::path(ex.cfg.output_dir)
                                              : fs::path(out_override);
    fs::create_directories(dir);
    write_events(dir / "events.csv", res.log);
    for (std::size_t i = 0; i < res.snapshots.size(); ++i) {
        char name[32];
        std::snprintf(name, sizeof name, "snapshot_%03zu.txt", i);
        write_measure(dir / name, ex.cfg, res.snapshots[i].measure,
                      "t = " + fmt(res.snapshots[i].time));
    }
    write_measure(dir / "final_empirical.txt", ex.cfg, res.final_measure,
                  "t = " + fmt(res.final_time));

    std::cout << "particles: " << n << " seed: " << seed << "\n";
    std::cout << "proposals: " << res.log.proposed << " accepted: " << res.log.accepted << "\n";

    // Exact integration at the same times, for the per-snapshot TV summary.
    std::vector<double> times = snaps;
    times.push_back(t_end);
    RecombinationFlow flow(ex.fs, ex.legend);
    const std::vector<DenseMeasure> exact = measures_at_times(flow, ex.mu0, times, ex.cfg.integrator);
    for (std::size_t i = 0; i < res.snapshots.size(); ++i) {
        std::cout << "snapshot t=" << fmt(res.snapshots[i].time)
                  << " tv_exact=" << fmt(tv_distance(res.snapshots[i].measure, exact[i])) << "\n";
    }
    std::cout << "final t=" << fmt(t_end)
              << " tv_exact=" << fmt(tv_distance(res.final_measure, exact.back())) << "\n";
    return 0;
}

int run_reach(const std::string& config_path, const std::string& seeds_path,
              const std::string& target_text) {
    LoadedExperiment ex = load_experiment(config_path);
    const std::vector<Word> words = load_word_list(ex.cfg, seeds_path);
    if (words.empty()) throw std::invalid_argument("reach: the seeds file lists no words");
    const WordSet seed(ex.space, words);

    const ClosureResult cl = closure(seed, ex.fs);
    std::cout << "seed words: " << seed.size() << "\n";
    std::cout << "covers_all_letters: " << (covers_all_letters(seed) ? "true" : "false") << "\n";
    std::cout << "closure: " << cl.members.size() << "/" << ex.space->state_count()
              << (cl.full ? " (closure = X)" : "") << "\n";

    if (!target_text.empty()) {
        const Word target = parse_word(ex.cfg, target_text);
        if (!cl.contains(target)) {
            std::cout << "target " << format_word(ex.cfg, target) << ": not reachable\n";
            return 0;
        }
        const auto steps = find_recombination_sequence(cl, target);
        std::cout << "target " << format_word(ex.cfg, target) << ": reachable in "
                  << steps.size() << " recombinations\n";
        for (const RecombinationStep& st : steps) {
            std::cout << "  " << format_word(ex.cfg, ex.space->decode(st.result))
                      << " <- recombine(" << format_word(ex.cfg, ex.space->decode(st.source))
                      << ", " << format_word(ex.cfg, ex.space->decode(st.partner)) << ", frame "
                      << (st.frame_index + 1) << ")\n";
        }
    }
    return 0;
}

template <class F>
int guarded(F&& f) {
    try {
        return f();
    } catch (const CapExceededError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 4;
    } catch (const NumericalError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Nonlinear recombination process: exact integration, particle simulation, "
                 "frame-system analysis, reachability"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_override;
    std::uint64_t seed = 0;

    CLI::App* check = app.add_subcommand("check", "Validate a config and analyze its frame system");
    check->add_option("--config", config_path, "experiment config (JSON)")->required();
    check->add_option("--seed", seed, "unused; accepted for interface uniformity");

    CLI::App* simulate =
        app.add_subcommand("simulate", "Integrate the flow and track convergence to the limit");
    double t_end = 0.0;
    double dt = 0.0;
    double tv_tol = 1e-6;
    simulate->add_option("--config", config_path, "experiment config (JSON)")->required();
    simulate->add_option("--t-end", t_end, "integration horizon")->required();
    CLI::Option* dt_opt = simulate->add_option("--dt", dt, "fixed step (default: automatic)");
    simulate->add_option("--tv-tol", tv_tol, "convergence threshold on total variation")
        ->capture_default_str();
    simulate->add_option("--out", out_override, "output directory (default: config output.dir)");
    simulate->add_option("--seed", seed, "unused; accepted for interface uniformity");

    CLI::App* particle = app.add_subcommand("particle", "Run the mean-field particle ensemble");
    std::uint64_t n = 0;
    particle->add_option("--config", config_path, "experiment config (JSON)")->required();
    CLI::Option* n_opt = particle->add_option("--n", n, "particle count (default: config)");
    CLI::Option* seed_opt = particle->add_option("--seed", seed, "RNG seed (default: config)");
    CLI::Option* te_opt =
        particle->add_option("--t-end", t_end, "horizon (default: last snapshot time)");
    particle->add_option("--out", out_override, "output directory (default: config output.dir)");

    CLI::App* reach = app.add_subcommand("reach", "Close a seed word set under recombination");
    std::string seeds_path;
    std::string target_text;
    reach->add_option("--config", config_path, "experiment config (JSON)")->required();
    reach->add_option("--seeds", seeds_path, "file with one seed word per line")->required();
    reach->add_option("--target", target_text, "word to derive a witness sequence for");
    reach->add_option("--seed", seed, "unused; accepted for interface uniformity");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    if (check->parsed()) return guarded([&] { return run_check(config_path); });
    if (simulate->parsed()) {
        return guarded([&] {
            return run_simulate(config_path, t_end, dt, dt_opt->count() > 0, tv_tol,
                                out_override);
        });
    }
    if (particle->parsed()) {
        return guarded([&] {
            return run_particle(config_path, n, n_opt->count() > 0, seed, seed_opt->count() > 0,
                                t_end, te_opt->count() > 0, out_override);
        });
    }
    if (reach->parsed()) {
        return guarded([&] { return run_reach(config_path, seeds_path, target_text); });
    }
    return 2;
}
