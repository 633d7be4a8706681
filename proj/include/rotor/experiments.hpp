#pragma once

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "rotor/circle_kernel.hpp"
#include "rotor/conditioned_model.hpp"
#include "rotor/dual_percolation.hpp"
#include "rotor/experiment_config.hpp"
#include "rotor/gibbs_sampler.hpp"
#include "rotor/io_util.hpp"
#include "rotor/path_dynamics.hpp"
#include "rotor/polymer_expansion.hpp"
#include "rotor/rotor_model.hpp"
#include "rotor/stats.hpp"

namespace rotor {

struct OutputFile {
    std::string name;
    std::size_t bytes = 0;
    std::string hash;
};

struct RunRecord {
    ExperimentConfig config;
    std::string out_dir;
    std::string content_hash;
    std::uint64_t seed = 0;
    int threads = 1;
    std::vector<OutputFile> outputs;
    double elapsed_seconds = 0.0;
    std::string status = "running";
    std::string error;
};

namespace detail_exp {

inline nlohmann::json record_json(const RunRecord& rec) {
    nlohmann::json j;
    j["experiment"] = rec.config.experiment;
    j["status"] = rec.status;
    j["content_hash"] = rec.content_hash;
    j["seed"] = rec.seed;
    j["threads"] = rec.threads;
    nlohmann::json cfg = nlohmann::json::object();
    for (const auto& [k, v] : rec.config.values) cfg[k] = v;
    j["config"] = cfg;
    nlohmann::json files = nlohmann::json::array();
    for (const OutputFile& f : rec.outputs)
        files.push_back({{"name", f.name}, {"bytes", f.bytes}, {"fnv64", f.hash}});
    j["outputs"] = files;
    j["elapsed_seconds"] = rec.elapsed_seconds;
    if (!rec.error.empty()) j["error"] = rec.error;
    return j;
}

inline void write_manifest(const RunRecord& rec) {
    std::ofstream os(rec.out_dir + "/manifest.json");
    os << record_json(rec).dump(2) << "\n";
}

inline void close_csv(RunRecord& rec, CsvWriter& csv) {
    OutputFile f;
    f.name = std::filesystem::path(csv.path()).filename().string();
    f.bytes = csv.bytes();
    f.hash = hex64(csv.content_hash());
    rec.outputs.push_back(f);
}

inline SpinConfig start_config(const std::string& start, const LatticeShape& shape,
                               const ConditionedParams& p, Rng& rng) {
    if (start == "ri") return ground_states(p, shape).x_ri;
    if (start == "le") return ground_states(p, shape).x_le;
    if (start == "random") return SpinConfig::uniform_random(shape, rng);
    throw std::invalid_argument("start must be one of ri, le, random");
}

// ---------------------------------------------------------------------------
// Individual experiments
// ---------------------------------------------------------------------------

inline void run_kernel_table(const ExperimentConfig& cfg, RunRecord& rec) {
    CsvWriter csv(rec.out_dir + "/kernel.csv", "t,delta,density");
    int n_delta = static_cast<int>(cfg.get_int("n_delta"));
    if (n_delta < 1) throw std::invalid_argument("n_delta must be >= 1");
    for (double t : cfg.get_double_list("t_values"))
        for (int j = 0; j < n_delta; ++j) {
            double delta = j * two_pi / n_delta;
            csv.row({fmt_double(t), fmt_double(delta), fmt_double(kernel::density(delta, t))});
        }
    close_csv(rec, csv);
}

inline void run_groundstate_scan(const ExperimentConfig& cfg, RunRecord& rec) {
    CsvWriter csv(rec.out_dir + "/groundstate.csv", "beta_j,t,h,epsilon,m");
    LatticeShape shape(4);
    for (double bj : cfg.get_double_list("beta_j_values"))
        for (double t : cfg.get_double_list("t_values")) {
            ConditionedParams p(bj, 1.0, t);
            GroundStatePair g = ground_states(p, shape);
            csv.row({fmt_double(bj), fmt_double(t), fmt_double(p.field()),
                     fmt_double(g.epsilon), fmt_double(g.m)});
        }
    close_csv(rec, csv);
}

inline void run_dobrushin(const ExperimentConfig& cfg, RunRecord& rec) {
    CsvWriter csv(rec.out_dir + "/dobrushin.csv", "beta_j,sum,satisfied");
    double lo = cfg.get_double("beta_j_min");
    double hi = cfg.get_double("beta_j_max");
    double step = cfg.get_double("beta_j_step");
    int d = static_cast<int>(cfg.get_int("dimension"));
    if (!(step > 0.0) || hi < lo) throw std::invalid_argument("bad beta_j scan range");
    for (int k = 0;; ++k) {
        double bj = lo + k * step;
        if (bj > hi + 1e-12) break;
        DobrushinResult r = dobrushin_sum(XYParams(bj, 1.0), d);
        csv.row({fmt_double(bj), fmt_double(r.sum), r.satisfied ? "1" : "0"});
    }
    close_csv(rec, csv);
}

inline void run_girsanov_check(const ExperimentConfig& cfg, RunRecord& rec) {
    const int L = static_cast<int>(cfg.get_int("L"));
    const double bj = cfg.get_double("beta_j");
    const double t = cfg.get_double("t");
    const double dt = cfg.get_double("dt");
    const long n_paths = cfg.get_int("n_paths");
    const std::uint64_t seed = rec.seed;
    if (n_paths < 1) throw std::invalid_argument("n_paths must be >= 1");
    LatticeShape shape(L);
    PathGrid grid(t, static_cast<int>(std::lround(t / dt)));
    auto edges = lattice_edges(shape);

    std::vector<double> density(n_paths, 0.0);
    std::vector<char> bound_ok(n_paths, 1);
    parallel_for(n_paths, rec.threads, [&](long path) {
        Rng rng = Rng::stream(seed, static_cast<std::uint64_t>(path));
        SpinConfig initial = SpinConfig::uniform_random(shape, rng);
        Trajectory traj = integrate_sde(initial, DriftSpec::free_motion_spec(), grid, rng);
        bool ok = true;
        for (auto [i, j] : edges) {
            double phi = girsanov_potential(i, j, traj, bj, 1.0);
            ok = ok && phibound_holds(i, j, traj, bj, 1.0, phi);
        }
        density[path] = girsanov_density(traj, bj, 1.0);
        bound_ok[path] = ok ? 1 : 0;
    });
    MeanErr me = mean_stderr(density);
    long violations = 0;
    for (char c : bound_ok) violations += c ? 0 : 1;

    CsvWriter csv(rec.out_dir + "/girsanov.csv",
                  "n_paths,mean_f,stderr_f,deviation,deviation_sigmas,bound_violations");
    double dev = std::fabs(me.mean - 1.0);
    double sigmas = me.stderr_ > 0.0 ? dev / me.stderr_ : 0.0;
    csv.row({std::to_string(n_paths), fmt_double(me.mean), fmt_double(me.stderr_),
             fmt_double(dev), fmt_double(sigmas), std::to_string(violations)});
    close_csv(rec, csv);
    if (violations > 0)
        throw std::runtime_error("girsanov-check: pathwise bound violated on " +
                                 std::to_string(violations) + " paths");
    if (dev > 3.0 * me.stderr_)
        throw std::runtime_error("girsanov-check: mean density deviates from 1 beyond 3 sigma");
}

inline void write_series_csv(const std::string& path, const ObservableSeries& series,
                             RunRecord& rec) {
    CsvWriter csv(path, "sweep,M_LR,M_UD,energy,acc");
    for (const ObservableSample& s : series.samples)
        csv.row({std::to_string(s.sweep), fmt_double(s.m_lr), fmt_double(s.m_ud),
                 fmt_double(s.energy), fmt_double(s.acc)});
    close_csv(rec, csv);
}

inline void run_metastability(const ExperimentConfig& cfg, RunRecord& rec) {
    const int L = static_cast<int>(cfg.get_int("L"));
    const double bj = cfg.get_double("beta_j");
    const double t = cfg.get_double("t");
    const int replicas = static_cast<int>(cfg.get_int("replicas"));
    if (replicas < 1) throw std::invalid_argument("replicas must be >= 1");
    LatticeShape shape(L);
    ConditionedParams p(bj, 1.0, t);
    CouplingModel model = make_torus_model(shape, p.xy(), make_yspec_fields(shape, p));

    std::vector<ObservableSeries> all(replicas);
    parallel_for(replicas, rec.threads, [&](long r) {
        SamplerConfig sc;
        sc.sweeps = cfg.get_int("sweeps");
        sc.burn_in = cfg.get_int("burn_in");
        sc.thin = static_cast<int>(cfg.get_int("thin"));
        sc.proposal_width = cfg.get_double("width");
        sc.tune_width = sc.burn_in > 0;
        sc.seed = Rng::stream(rec.seed, static_cast<std::uint64_t>(r)).raw();
        Rng init_rng = Rng::stream(rec.seed, 1000 + static_cast<std::uint64_t>(r));
        SpinConfig initial = start_config(cfg.get_string("start"), shape, p, init_rng);
        all[r] = run_chain(initial, model, sc);
    });

    for (int r = 0; r < replicas; ++r) {
        std::string name = rec.out_dir + "/series_r" + std::to_string(r);
        write_series_csv(name + ".csv", all[r], rec);
        // metadata sidecar: full parameter set and the replica's derived seed
        nlohmann::json meta;
        for (const auto& [k, v] : cfg.values) meta[k] = v;
        meta["replica"] = r;
        meta["base_seed"] = rec.seed;
        std::ofstream ms(name + ".json");
        ms << meta.dump(2) << "\n";
    }

    CsvWriter summary(rec.out_dir + "/summary.csv",
                      "replica,mean_m_lr,stderr_m_lr,min_m_lr,max_m_lr,mean_acc");
    for (int r = 0; r < replicas; ++r) {
        std::vector<double> lr, acc;
        for (const ObservableSample& s : all[r].samples) {
            lr.push_back(s.m_lr);
            acc.push_back(s.acc);
        }
        MeanErr me = batch_means(lr);
        double lo = lr.empty() ? 0.0 : *std::min_element(lr.begin(), lr.end());
        double hi = lr.empty() ? 0.0 : *std::max_element(lr.begin(), lr.end());
        MeanErr ma = mean_stderr(acc);
        summary.row({std::to_string(r), fmt_double(me.mean), fmt_double(me.stderr_),
                     fmt_double(lo), fmt_double(hi), fmt_double(ma.mean)});
    }
    close_csv(rec, summary);

    // gnuplot-style trace data: sweep, one M_LR column per replica
    if (!all.empty() && !all[0].samples.empty()) {
        CsvWriter dat(rec.out_dir + "/m_lr_traces.dat", "# sweep m_lr per replica");
        for (std::size_t k = 0; k < all[0].samples.size(); ++k) {
            std::string line = std::to_string(all[0].samples[k].sweep);
            bool complete = true;
            for (int r = 0; r < replicas; ++r) {
                if (k >= all[r].samples.size()) {
                    complete = false;
                    break;
                }
                line += " " + fmt_double(all[r].samples[k].m_lr);
            }
            if (complete) dat.write_line(line);
        }
        close_csv(rec, dat);
    }
}

inline void run_percolation_scan(const ExperimentConfig& cfg, RunRecord& rec) {
    const int L = static_cast<int>(cfg.get_int("L"));
    const double bj = cfg.get_double("beta_j");
    const double t = cfg.get_double("t");
    const int n_configs = static_cast<int>(cfg.get_int("n_configs"));
    if (n_configs < 1) throw std::invalid_argument("n_configs must be >= 1");
    LatticeShape shape(L);
    ConditionedParams p(bj, 1.0, t);
    FieldSpec fields = make_yspec_fields(shape, p);
    CouplingModel model = make_torus_model(shape, p.xy(), fields);
    GroundStatePair g = ground_states(p, shape);

    SamplerConfig sc;
    sc.sweeps = cfg.get_int("sweeps");
    sc.burn_in = cfg.get_int("burn_in");
    sc.proposal_width = cfg.get_double("width");
    sc.tune_width = sc.burn_in > 0;
    sc.seed = rec.seed;
    long stride = std::max<long>(1, (sc.sweeps - sc.burn_in) / n_configs);
    Rng init_rng = Rng::stream(rec.seed, 7);
    SpinConfig initial = start_config(cfg.get_string("start"), shape, p, init_rng);
    std::vector<SpinConfig> configs = run_chain_states(initial, model, sc, stride);
    if (static_cast<int>(configs.size()) > n_configs) configs.resize(n_configs);

    std::vector<double> deltas = cfg.get_double_list("delta_values");
    for (std::size_t k = 0; k < configs.size(); ++k) {
        CsvWriter csv(rec.out_dir + "/percolation_config" + std::to_string(k) + ".csv",
                      "delta,n_vertices,n_clusters,largest_fraction,spans,orientation_of_largest");
        for (double delta : deltas) {
            LowEnergyGraph graph = build_low_energy_graph(configs[k], p.xy(), fields, delta, g.m);
            ClusterReport report = connected_clusters(graph);
            classify_clusters(configs[k], report);
            std::string orient = report.largest_cluster >= 0
                ? orientation_name(report.orientations[report.largest_cluster])
                : "none";
            csv.row({fmt_double(delta), std::to_string(graph.n_vertices()),
                     std::to_string(report.n_clusters()), fmt_double(report.largest_fraction),
                     report.spans ? "1" : "0", orient});
        }
        close_csv(rec, csv);
    }
}

inline void run_badprobe(const ExperimentConfig& cfg, RunRecord& rec) {
    ConditionedParams p(cfg.get_double("beta_j"), 1.0, cfg.get_double("t"));
    SamplerConfig sc;
    sc.sweeps = cfg.get_int("sweeps");
    sc.burn_in = cfg.get_int("burn_in");
    sc.proposal_width = cfg.get_double("width");
    sc.seed = rec.seed;
    std::vector<BadProbeRow> rows = bad_config_probe(cfg.get_int_list("L_values"), p,
                                                     cfg.get_double("ring_xi"),
                                                     cfg.get_double("ring_eta"), sc);
    CsvWriter csv(rec.out_dir + "/badprobe.csv",
                  "L,gap,stderr,mean_xi,stderr_xi,mean_eta,stderr_eta");
    CsvWriter dat(rec.out_dir + "/badprobe.dat", "# L gap stderr");
    for (const BadProbeRow& r : rows) {
        csv.row({std::to_string(r.L), fmt_double(r.gap), fmt_double(r.gap_err),
                 fmt_double(r.mean_xi), fmt_double(r.err_xi), fmt_double(r.mean_eta),
                 fmt_double(r.err_eta)});
        dat.write_line(std::to_string(r.L) + " " + fmt_double(r.gap) + " " +
                       fmt_double(r.gap_err));
    }
    close_csv(rec, csv);
    close_csv(rec, dat);
}

inline void run_chessboard(const ExperimentConfig& cfg, RunRecord& rec) {
    const double t = cfg.get_double("t");
    const int n_grid = static_cast<int>(cfg.get_int("n_grid"));
    const int n_fsets = static_cast<int>(cfg.get_int("n_fsets"));
    LatticeShape shape(2);
    CsvWriter csv(rec.out_dir + "/chessboard.csv", "beta_j,f_index,lhs,rhs,holds");
    bool all_hold = true;
    for (double bj : cfg.get_double_list("beta_j_values")) {
        ConditionedParams p(bj, 1.0, t);
        FieldSpec fields = make_yspec_fields(shape, p);
        Rng rng = Rng::stream(rec.seed, static_cast<std::uint64_t>(bj * 1000));
        for (int fi = 0; fi < n_fsets; ++fi) {
            std::vector<PlaquetteFn> f_set;
            for (int a = 0; a < 4; ++a) f_set.push_back(random_invariant_plaquette_fn(rng));
            ChessboardResult r = chessboard_check(f_set, shape, p.xy(), fields, n_grid);
            all_hold = all_hold && r.holds;
            csv.row({fmt_double(bj), std::to_string(fi), fmt_double(r.lhs), fmt_double(r.rhs),
                     r.holds ? "1" : "0"});
        }
    }
    close_csv(rec, csv);
    if (!all_hold) throw std::runtime_error("chessboard: inequality violated");
}

inline void run_polymer_check(const ExperimentConfig& cfg, RunRecord& rec) {
    const int n_systems = static_cast<int>(cfg.get_int("n_systems"));
    const int max_polymers = static_cast<int>(cfg.get_int("max_polymers"));
    const int n_sites = static_cast<int>(cfg.get_int("n_sites"));
    const int max_order = static_cast<int>(cfg.get_int("max_order"));
    const std::string input_file = cfg.get_string("input_file");

    std::vector<polymer::PolymerSystem> systems;
    if (!input_file.empty()) {
        std::ifstream is(input_file);
        if (!is) throw std::invalid_argument("polymer-check: cannot open " + input_file);
        systems.push_back(polymer::parse_system(is));
    } else {
        Rng rng = Rng::stream(rec.seed, 11);
        while (static_cast<int>(systems.size()) < n_systems) {
            int n_poly = 2 + static_cast<int>(rng.uniform() * (max_polymers - 1));
            std::vector<polymer::Polymer> ps;
            std::vector<double> ws;
            for (int k = 0; k < n_poly; ++k) {
                int sz = 1 + static_cast<int>(rng.uniform() * 3);
                std::vector<int> support;
                for (int s = 0; s < sz; ++s)
                    support.push_back(static_cast<int>(rng.uniform() * n_sites));
                ps.emplace_back(k, std::move(support));
                ws.push_back(rng.uniform(-1.0, 1.0));
            }
            polymer::PolymerSystem sys(std::move(ps), std::move(ws));
            polymer::KpResult kp = polymer::kp_check(sys);
            if (kp.worst_ratio <= 0.0) continue;
            double target = rng.uniform(0.2, 0.85);
            for (double& w : sys.weights) w *= target / kp.worst_ratio;
            if (!polymer::kp_check(sys).holds) continue;
            try {
                polymer::brute_force_logZ(sys);
            } catch (const std::domain_error&) {
                continue;
            }
            systems.push_back(std::move(sys));
        }
        std::ofstream txt(rec.out_dir + "/polymer_systems.txt");
        for (std::size_t k = 0; k < systems.size(); ++k) {
            txt << "# system " << k << "\n";
            polymer::format_system(systems[k], txt);
        }
    }

    CsvWriter csv(rec.out_dir + "/polymer.csv",
                  "system,n_polymers,worst_ratio,holds,log_z,truncated,abs_err");
    double max_err = 0.0;
    for (std::size_t k = 0; k < systems.size(); ++k) {
        polymer::KpResult kp = polymer::kp_check(systems[k]);
        double lz = polymer::brute_force_logZ(systems[k]);
        double tr = polymer::truncated_expansion(systems[k], max_order);
        double err = std::fabs(tr - lz);
        if (kp.holds) max_err = std::max(max_err, err);
        csv.row({std::to_string(k), std::to_string(systems[k].size()),
                 fmt_double(kp.worst_ratio), kp.holds ? "1" : "0", fmt_double(lz),
                 fmt_double(tr), fmt_double(err)});
    }
    close_csv(rec, csv);
    if (input_file.empty() && max_err > 1e-6)
        throw std::runtime_error("polymer-check: truncated expansion misses brute force by " +
                                 fmt_double(max_err));
}

} // namespace detail_exp

// Dispatch an experiment: validate, write the running manifest, produce the
// data files, finalize the manifest.  Identical config + seed reproduce every
// data file byte for byte; the exit contract is that assertion failures
// inside an experiment surface as exceptions (nonzero exit in the CLI).
inline RunRecord run_experiment(const ExperimentConfig& cfg, const std::string& out_dir,
                                int threads = 1) {
    RunRecord rec;
    rec.config = cfg;
    rec.out_dir = out_dir;
    rec.threads = threads < 1 ? 1 : threads;
    rec.seed = cfg.get_u64("seed");
    std::string canonical = serialize_experiment_config(cfg);
    rec.content_hash = hex64(fnv1a(canonical));
    std::filesystem::create_directories(out_dir);
    detail_exp::write_manifest(rec);

    auto start = std::chrono::steady_clock::now();
    try {
        const std::string& name = cfg.experiment;
        if (name == "kernel-table") detail_exp::run_kernel_table(cfg, rec);
        else if (name == "groundstate-scan") detail_exp::run_groundstate_scan(cfg, rec);
        else if (name == "dobrushin") detail_exp::run_dobrushin(cfg, rec);
        else if (name == "girsanov-check") detail_exp::run_girsanov_check(cfg, rec);
        else if (name == "metastability") detail_exp::run_metastability(cfg, rec);
        else if (name == "percolation-scan") detail_exp::run_percolation_scan(cfg, rec);
        else if (name == "badprobe") detail_exp::run_badprobe(cfg, rec);
        else if (name == "chessboard") detail_exp::run_chessboard(cfg, rec);
        else if (name == "polymer-check") detail_exp::run_polymer_check(cfg, rec);
        else throw std::invalid_argument("unknown experiment: " + name);
        rec.status = "complete";
    } catch (const std::exception& e) {
        rec.status = "error";
        rec.error = e.what();
        rec.elapsed_seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        detail_exp::write_manifest(rec);
        throw;
    }
    rec.elapsed_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    detail_exp::write_manifest(rec);
    return rec;
}

// Rewrite CSV series as gnuplot-style .dat: whitespace-separated columns with
// a '#' comment header.  Single-column inputs gain an index column.
inline std::string emit_plot_data(const std::string& csv_path, const std::string& out_dir) {
    std::string text = read_file(csv_path);
    std::istringstream is(text);
    std::string header;
    if (!std::getline(is, header)) throw std::runtime_error("emit_plot_data: empty file");
    std::filesystem::create_directories(out_dir);
    std::string stem = std::filesystem::path(csv_path).stem().string();
    std::string out_path = out_dir + "/" + stem + ".dat";
    std::ofstream os(out_path);
    for (char& c : header)
        if (c == ',') c = ' ';
    bool single_column = header.find(' ') == std::string::npos;
    os << "# " << (single_column ? "index " + header : header) << "\n";
    std::string line;
    long index = 0;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        for (char& c : line)
            if (c == ',') c = ' ';
        if (single_column) os << index++ << " " << line << "\n";
        else os << line << "\n";
    }
    return out_path;
}

} // namespace rotor
