#include "dwrom/harness.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>

#include "dwrom/perf.hpp"

namespace dwrom {

namespace fs = std::filesystem;

// ---------------------------------------------------------------------------
// Benchmark catalog

namespace {

std::vector<CatalogEntry> build_catalog() {
    std::vector<CatalogEntry> cat;
    // BBM, time-parameter training draws h0 in [0.7, 1.3] of the nominal 1.0.
    cat.push_back({"bbm", "monochromatic", 250.0, 200.0, 0.7, 1.3, 0.0, 0.0,
                   json{{"h0", 0.63}, {"a0", 0.05}, {"initial", "two_cosine"}},
                   "online horizon T=250 (in-training retest); out-of-training preset "
                   "h0=0.63, a0=0.05 with the two-cosine initial profile"});
    cat.push_back({"bbm", "undular_bore", 15.0, 20.0, 0.7, 1.3, 0.0, 0.0,
                   json{{"h0", 0.63}, {"a0", 0.03}},
                   "online horizon T=15; out-of-training preset h0=0.63, a0=0.03"});
    cat.push_back({"bbm", "solitary_bar", 60.0, 60.0, 0.7, 1.3, 0.0, 0.0,
                   json{{"h0", 0.63}, {"a0", 0.15}},
                   "online horizon T=60; out-of-training preset h0=0.63, a0=0.15"});
    // EB, offline ranges are absolute.
    cat.push_back({"eb", "solitary_bar", 18.0, 25.0, 0.8, 1.2, 0.16, 0.24,
                   json{{"h0", 0.76}, {"a0", 0.252}},
                   "snapshots to T=25, online horizon T=18; h0 in [0.8,1.2], a0 in "
                   "[0.16,0.24]; out-of-training preset h0=0.76, a0=0.252"});
    cat.push_back({"eb", "monochromatic_bar", 40.0, 40.0, 0.4, 0.6, 0.0216, 0.0324,
                   json{{"h0", 0.4}, {"a0", 0.027}},
                   "online horizon T=40; h0 in [0.4,0.6], a0 in [0.0216,0.0324]; "
                   "out-of-training preset h0=0.4, a0=0.027"});
    return cat;
}

const std::vector<CatalogEntry>& catalog() {
    static const std::vector<CatalogEntry> cat = build_catalog();
    return cat;
}

}  // namespace

const CatalogEntry& catalog_lookup(const std::string& model, const std::string& benchmark) {
    for (const auto& e : catalog())
        if (e.model == model && e.benchmark == benchmark) return e;
    throw ConfigError("unknown benchmark '" + benchmark + "' for model '" + model + "'");
}

std::vector<CatalogEntry> catalog_all() { return catalog(); }

// ---------------------------------------------------------------------------
// Config

RunConfig run_config_from_json(const json& doc) {
    RunConfig cfg;
    cfg.raw = doc;
    cfg.model = doc.value("model", cfg.model);
    cfg.benchmark = doc.value("benchmark", cfg.benchmark);
    cfg.reduction = doc.value("reduction", cfg.reduction);
    if (cfg.model != "bbm" && cfg.model != "eb")
        throw ConfigError("config: model must be 'bbm' or 'eb'");
    if (cfg.reduction != "fom" && cfg.reduction != "pdrom" && cfg.reduction != "eimrom" &&
        cfg.reduction != "phi_only")
        throw ConfigError("config: unknown reduction '" + cfg.reduction + "'");
    if (cfg.model == "eb" && cfg.reduction == "phi_only")
        throw ConfigError("config: phi_only is a scalar-model reduction");

    if (doc.contains("overrides")) {
        const json& ov = doc.at("overrides");
        if (ov.contains("nh")) cfg.overrides.nh = ov.at("nh").get<int>();
        if (ov.contains("a0")) cfg.overrides.a0 = ov.at("a0").get<double>();
        if (ov.contains("h0")) cfg.overrides.h0 = ov.at("h0").get<double>();
        if (ov.contains("cfl")) cfg.overrides.cfl = ov.at("cfl").get<double>();
        if (ov.contains("t_end")) cfg.overrides.t_end = ov.at("t_end").get<double>();
        if (ov.contains("p")) cfg.overrides.p = ov.at("p").get<double>();
        if (ov.contains("d_cip")) cfg.overrides.d_cip = ov.at("d_cip").get<double>();
    }

    cfg.tol_pod = doc.value("tol_pod", cfg.tol_pod);
    cfg.n_rb = doc.value("n_rb", cfg.n_rb);
    cfg.tol_eim = doc.value("tol_eim", cfg.tol_eim);
    cfg.n_eim = doc.value("n_eim", cfg.n_eim);
    cfg.n_snapshots = doc.value("n_snapshots", cfg.n_snapshots);
    cfg.n_params = doc.value("n_params", cfg.n_params);
    cfg.seed = doc.value("seed", cfg.seed);
    cfg.out_dir = doc.value("out_dir", cfg.out_dir);
    cfg.basis_path = doc.value("basis_path", cfg.basis_path);
    cfg.eim_path = doc.value("eim_path", cfg.eim_path);
    cfg.snapshots_path = doc.value("snapshots_path", cfg.snapshots_path);
    cfg.offline_inline = doc.value("offline_inline", cfg.offline_inline);
    cfg.write_snapshots = doc.value("write_snapshots", cfg.write_snapshots);
    cfg.eb_variant = doc.value("eb_variant", cfg.eb_variant);
    cfg.n_profile_times = doc.value("n_profile_times", cfg.n_profile_times);
    cfg.n_error_samples = doc.value("n_error_samples", cfg.n_error_samples);
    cfg.timing_reps = doc.value("timing_reps", cfg.timing_reps);
    if (doc.contains("online_t_end")) cfg.online_t_end = doc.at("online_t_end").get<double>();

    if (cfg.reduction != "fom" && cfg.basis_path.empty() && !cfg.offline_inline)
        throw ConfigError("config: reduced runs need basis_path or offline_inline");
    if (cfg.eb_variant != "psi" && cfg.eb_variant != "fused")
        throw ConfigError("config: eb_variant must be 'psi' or 'fused'");
    return cfg;
}

std::vector<double> uniform_times(double t_end, int n) {
    if (n <= 1 || t_end <= 0.0) return {0.0};
    std::vector<double> t(n);
    for (int k = 0; k < n; ++k) t[k] = t_end * static_cast<double>(k) / (n - 1);
    return t;
}

// ---------------------------------------------------------------------------
// CSV writers

namespace {

void ensure_dir(const std::string& dir) {
    if (!dir.empty()) fs::create_directories(dir);
}

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

}  // namespace

void write_profile_csv(const std::string& path, const std::vector<double>& times, const Vec& x,
                       const Mat& profiles) {
    std::ofstream os(path, std::ios::trunc);
    if (!os) throw std::runtime_error("cannot open '" + path + "'");
    os << "t,x,value\n";
    for (int c = 0; c < profiles.cols(); ++c)
        for (int i = 0; i < x.size(); ++i)
            os << fmt(times[c]) << ',' << fmt(x[i]) << ',' << fmt(profiles(i, c)) << '\n';
}

void write_study_csv(const std::string& path, const json& rows) {
    std::ofstream os(path, std::ios::trunc);
    if (!os) throw std::runtime_error("cannot open '" + path + "'");
    os << "n_rb,n_eim,error,time_ratio\n";
    for (const auto& r : rows)
        os << r.at("n_rb").get<int>() << ',' << r.at("n_eim").get<int>() << ','
           << fmt(r.at("error").get<double>()) << ',' << fmt(r.at("time_ratio").get<double>())
           << '\n';
}

void write_sweep_csv(const std::string& path, const json& rows) {
    std::ofstream os(path, std::ios::trunc);
    if (!os) throw std::runtime_error("cannot open '" + path + "'");
    os << "a0,h0,eps,mu,error_pdrom,error_eimrom\n";
    for (const auto& r : rows)
        os << fmt(r.at("a0").get<double>()) << ',' << fmt(r.at("h0").get<double>()) << ','
           << fmt(r.at("eps").get<double>()) << ',' << fmt(r.at("mu").get<double>()) << ','
           << fmt(r.at("error_pdrom").get<double>()) << ','
           << fmt(r.at("error_eimrom").get<double>()) << '\n';
}

// ---------------------------------------------------------------------------
// Model plumbing shared by the subcommands

namespace {

double u01(std::mt19937_64& rng) {
    // fixed 53-bit mapping, independent of library distribution details
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

BenchmarkOverrides merge_overrides(const BenchmarkOverrides& base, std::optional<double> a0,
                                   std::optional<double> h0, std::optional<double> t_end) {
    BenchmarkOverrides ov = base;
    if (a0) ov.a0 = a0;
    if (h0) ov.h0 = h0;
    if (t_end) ov.t_end = t_end;
    return ov;
}

struct BbmSetup {
    BbmProblem problem;
    Vec eta0;
};

BbmSetup bbm_setup(const std::string& benchmark, const BenchmarkOverrides& ov,
                   const std::string& initial = "") {
    BbmBenchmark bm = bbm_benchmark(benchmark, ov);
    if (initial == "two_cosine") {
        // altered out-of-training initial profile for the monochromatic test
        const auto& g = bm.config.grid;
        const double a0 = bm.config.a0;
        for (int i = 0; i < g.nh; ++i) {
            const double x = g.node(i);
            bm.eta0[i] = -1.2 * a0 * std::cos(0.4 * M_PI * (x - 2.0)) +
                         0.1 * a0 * std::cos(0.8 * M_PI * x);
        }
    } else if (!initial.empty()) {
        throw ConfigError("unknown initial profile '" + initial + "'");
    }
    Vec lift;
    if (bm.config.grid.bc == Bc::DirichletLeftLifted) lift = bm.eta0;
    BbmSetup s{build_bbm_problem(bm.config, lift), bm.eta0};
    return s;
}

struct EbSetup {
    EbConfig config;
    FemMatrices fem;
    EbState state0;
};

EbSetup eb_setup(const std::string& benchmark, const BenchmarkOverrides& ov) {
    EbBenchmark bm = eb_benchmark(benchmark, ov);
    EbSetup s{bm.config, assemble_eb_matrices(bm.config), bm.state0};
    return s;
}

Vec bbm_masked_flux(const BbmProblem& p, const Vec& eta) {
    Vec f = bbm_explicit_rhs(p, eta);
    if (p.dirichlet_left()) f[0] = 0.0;
    return f;
}

SnapshotSet collect_bbm_snapshots(const BbmProblem& p, const Vec& eta0, double t_end,
                                  int n_snapshots, double h0, double a0, int run_id) {
    const std::vector<double> times = uniform_times(t_end, n_snapshots);
    Mat states;
    std::vector<double> at;
    bbm_run(p, {eta0, 0.0, 0}, t_end, times, &states, &at);

    SnapshotSet set;
    set.states = states;
    Mat fluxes(states.rows(), states.cols());
    for (int c = 0; c < states.cols(); ++c) fluxes.col(c) = bbm_masked_flux(p, states.col(c));
    set.fluxes = fluxes;
    for (size_t k = 0; k < at.size(); ++k) set.meta.push_back({at[k], h0, a0, run_id});
    return set;
}

struct EbSnapshots {
    SnapshotSet eta;
    SnapshotSet q;
};

EbSnapshots collect_eb_snapshots(const EbSetup& s, double t_end, int n_snapshots, double h0,
                                 double a0, int run_id) {
    const std::vector<double> times = uniform_times(t_end, n_snapshots);
    Mat eta_s, q_s;
    std::vector<double> at;
    eb_run(s.config, s.fem, s.state0, t_end, times, &eta_s, &q_s, &at);

    EbSnapshots snaps;
    snaps.eta.states = eta_s;
    snaps.q.states = q_s;
    Mat fe(eta_s.rows(), eta_s.cols()), fq(q_s.rows(), q_s.cols());
    for (int c = 0; c < eta_s.cols(); ++c) {
        const EbFluxes f = eb_nonlinear_ops(s.config, eta_s.col(c), q_s.col(c));
        fe.col(c) = f.n_eta;
        fq.col(c) = f.n_q;
    }
    snaps.eta.fluxes = fe;
    snaps.q.fluxes = fq;
    for (size_t k = 0; k < at.size(); ++k) {
        snaps.eta.meta.push_back({at[k], h0, a0, run_id});
        snaps.q.meta.push_back({at[k], h0, a0, run_id});
    }
    return snaps;
}

// Reduced-run drivers. dt is frozen from the initial reconstructed state so
// the online cost stays independent of adaptive full-grid scans; samples are
// hit exactly by clipping.
Mat run_bbm_reduced_traj(const std::string& kind, const BbmProblem& p, const ReducedBasis& basis,
                         const ReducedBbmOps& ops, const EimSpace* eim, const PhiOnlyOps* phi_ops,
                         const Vec& eta0, double t_end, const std::vector<double>& times) {
    Mat traj(p.config.grid.nh, static_cast<int>(times.size()));
    const Vec dev0 = p.lift.size() ? Vec(eta0 - p.lift) : eta0;

    Vec full = eta0;
    Vec hat;
    if (kind != "phi_only") hat = ops.m_lu.solve(basis.w.transpose() * dev0);

    auto reconstruct = [&]() -> Vec {
        if (kind == "phi_only") return full;
        Vec x = basis.v * hat;
        if (p.lift.size()) x += p.lift;
        return x;
    };

    const double dt0 = bbm_dt(p, eta0);
    double t = 0.0;
    size_t next = 0;
    auto record = [&]() {
        while (next < times.size() && t >= times[next] - 1e-12) {
            traj.col(static_cast<int>(next)) = reconstruct();
            ++next;
        }
    };
    record();
    while (t < t_end - 1e-12) {
        double dt = dt0;
        if (next < times.size() && t + dt > times[next]) dt = times[next] - t;
        if (t + dt > t_end) dt = t_end - t;
        if (kind == "pdrom")
            hat = pdrom_bbm_step(ops, p, basis, hat, dt);
        else if (kind == "eimrom")
            hat = eimrom_bbm_step(ops, *eim, p, basis, hat, dt);
        else
            full = phi_only_step(*phi_ops, p, basis, full, dt);
        t += dt;
        record();
    }
    return traj;
}

Mat run_eb_reduced_traj(const std::string& kind, const EbSetup& s, const ReducedBasis& b_eta,
                        const ReducedBasis& b_q, const ReducedEbOps& ops, const EimSpace* eim_eta,
                        const EimSpace* eim_q, EbRomVariant variant, double t_end,
                        const std::vector<double>& times) {
    Mat traj(s.config.grid.nh, static_cast<int>(times.size()));
    EbReducedState hat{b_eta.v.transpose() * s.state0.eta, b_q.v.transpose() * s.state0.q, 0.0};

    const double dt0 = eb_dt(s.config, s.state0);
    size_t next = 0;
    auto record = [&]() {
        while (next < times.size() && hat.t >= times[next] - 1e-12) {
            traj.col(static_cast<int>(next)) = b_eta.v * hat.eta_hat;
            ++next;
        }
    };
    record();
    while (hat.t < t_end - 1e-12) {
        double dt = dt0;
        if (next < times.size() && hat.t + dt > times[next]) dt = times[next] - hat.t;
        if (hat.t + dt > t_end) dt = t_end - hat.t;
        if (kind == "pdrom")
            hat = pdrom_eb_step(ops, s.config, b_eta, b_q, hat, dt, variant);
        else
            hat = eimrom_eb_step(ops, *eim_eta, *eim_q, s.config, s.fem, b_eta, b_q, hat, dt,
                                 variant);
        record();
    }
    return traj;
}

double wall_seconds(const std::function<void()>& fn) {
    const auto t0 = std::chrono::steady_clock::now();
    fn();
    const auto t1 = std::chrono::steady_clock::now();
    return std::chrono::duration<double>(t1 - t0).count();
}

struct TimedRun {
    double total = 0.0, solver = 0.0, flux = 0.0;
};

// min-of-reps wall time; perf categories from the fastest repetition
TimedRun timed(const std::function<void()>& fn, int reps) {
    TimedRun best;
    best.total = 1e300;
    for (int r = 0; r < std::max(reps, 1); ++r) {
        perf::reset();
        const double w = wall_seconds(fn);
        if (w < best.total)
            best = {w, perf::seconds(perf::Category::LinearSolve),
                    perf::seconds(perf::Category::Flux)};
    }
    return best;
}

double relative_tol_to_abs(const Mat& fluxes, double tol_rel) {
    double m = 0.0;
    for (int c = 0; c < fluxes.cols(); ++c) m = std::max(m, fluxes.col(c).cwiseAbs().maxCoeff());
    return m > 0.0 ? tol_rel * m : tol_rel;
}

EimSpace load_eim_space(const Artifact& art, const std::string& suffix, const Grid1D& grid,
                        const Mat& w) {
    EimSpace space;
    const Mat& psi = art.tensor("psi" + suffix);
    const Vec zv = art.vector("z" + suffix);
    space.psi = psi;
    space.z.resize(zv.size());
    for (int i = 0; i < zv.size(); ++i) space.z[i] = static_cast<int>(std::lround(zv[i]));
    space.tol = art.meta.value("tol_eim_abs", 0.0);
    space.tol_reached = art.meta.value("tol_reached", true);
    for (int i = 0; i < zv.size(); ++i) {
        std::array<int, 5> st{};
        for (int k = -2; k <= 2; ++k) {
            int j = space.z[i] + k;
            if (grid.periodic()) {
                j %= grid.nh;
                if (j < 0) j += grid.nh;
            } else {
                j = std::clamp(j, 0, grid.nh - 1);
            }
            st[k + 2] = j;
        }
        space.stencils.push_back(st);
    }
    eim_set_projection(space, w);
    return space;
}

ReducedBasis load_basis(const Artifact& art, const std::string& suffix) {
    ReducedBasis b;
    b.v = art.tensor("v" + suffix);
    b.w = art.tensor("w" + suffix);
    b.sigma = art.vector("sigma" + suffix);
    b.n_rb = static_cast<int>(b.v.cols());
    b.mode = art.meta.value("mode", std::string("galerkin")) == "energy" ? TestSpaceMode::Energy
                                                                         : TestSpaceMode::Galerkin;
    return b;
}

// Truncate a persisted basis (columns are already energy-ordered).
ReducedBasis truncate_basis(const ReducedBasis& b, int n_rb) {
    if (n_rb <= 0 || n_rb >= b.n_rb) return b;
    ReducedBasis out = b;
    out.v = b.v.leftCols(n_rb);
    out.w = b.w.leftCols(n_rb);
    out.n_rb = n_rb;
    return out;
}

}  // namespace

// ---------------------------------------------------------------------------
// offline

json run_offline(const RunConfig& cfg) {
    ensure_dir(cfg.out_dir);
    const CatalogEntry& cat = catalog_lookup(cfg.model, cfg.benchmark);
    std::mt19937_64 rng(cfg.seed);

    const double t_train =
        cfg.overrides.t_end ? *cfg.overrides.t_end : cat.offline_t_end;

    // Draw the parameter schedule. A single parameter means the nominal
    // benchmark configuration; multiple parameters sample the catalog ranges.
    std::vector<std::optional<double>> h0_draws, a0_draws;
    for (int k = 0; k < cfg.n_params; ++k) {
        if (cfg.n_params == 1) {
            h0_draws.push_back(std::nullopt);
            a0_draws.push_back(std::nullopt);
            break;
        }
        h0_draws.push_back(cat.h0_lo + u01(rng) * (cat.h0_hi - cat.h0_lo));
        if (cat.a0_lo > 0.0 && cat.a0_lo != cat.a0_hi)
            a0_draws.push_back(cat.a0_lo + u01(rng) * (cat.a0_hi - cat.a0_lo));
        else
            a0_draws.push_back(std::nullopt);
    }

    json draws = json::array();

    const PodTruncation trunc =
        cfg.n_rb > 0 ? PodTruncation::by_n(cfg.n_rb) : PodTruncation::by_tol(cfg.tol_pod);

    json result;
    result["seed"] = cfg.seed;
    result["t_train"] = t_train;

    json common_meta = {{"model", cfg.model},     {"benchmark", cfg.benchmark},
                        {"seed", cfg.seed},       {"t_train", t_train},
                        {"n_snapshots", cfg.n_snapshots}, {"tol_pod", cfg.tol_pod},
                        {"n_rb", cfg.n_rb}};

    if (cfg.model == "bbm") {
        SnapshotSet all;
        BbmSetup ref_setup = bbm_setup(cfg.benchmark, cfg.overrides);
        for (size_t k = 0; k < h0_draws.size(); ++k) {
            BbmSetup s = bbm_setup(
                cfg.benchmark, merge_overrides(cfg.overrides, a0_draws[k], h0_draws[k], {}));
            draws.push_back({{"h0", s.problem.config.h0}, {"a0", s.problem.config.a0}});
            all.append(collect_bbm_snapshots(s.problem, s.eta0, t_train, cfg.n_snapshots,
                                             s.problem.config.h0, s.problem.config.a0,
                                             static_cast<int>(k)));
        }
        result["draws"] = draws;
        common_meta["draws"] = draws;
        // Dirichlet runs reduce the deviation from the frozen lift.
        if (ref_setup.problem.lift.size())
            all.states.colwise() -= ref_setup.problem.lift;

        if (cfg.write_snapshots) {
            Artifact snap;
            snap.tensors["states"] = all.states;
            snap.tensors["fluxes"] = *all.fluxes;
            snap.meta = common_meta;
            snap.meta["kind"] = "snapshots";
            save_artifact(cfg.out_dir + "/snapshots.dwrom", snap);
            result["snapshots_path"] = cfg.out_dir + "/snapshots.dwrom";
        }

        const BbmProblem& p = ref_setup.problem;
        auto theta = [&](const Vec& v) { return p.theta_apply(v); };
        ReducedBasis basis = pod_basis(all, trunc, TestSpaceMode::Energy, theta);

        Artifact ba;
        ba.tensors["v"] = basis.v;
        ba.tensors["w"] = basis.w;
        ba.tensors["sigma"] = basis.sigma;
        ba.meta = common_meta;
        ba.meta["kind"] = "basis";
        ba.meta["mode"] = "energy";
        ba.meta["n_rb_selected"] = basis.n_rb;
        save_artifact(cfg.out_dir + "/basis.dwrom", ba);
        result["basis_path"] = cfg.out_dir + "/basis.dwrom";
        result["n_rb"] = basis.n_rb;

        if (cfg.tol_eim > 0.0 || cfg.n_eim > 0) {
            const double tol_abs =
                cfg.tol_eim > 0.0 ? relative_tol_to_abs(*all.fluxes, cfg.tol_eim) : 1e-300;
            EimSpace space = eim_greedy(*all.fluxes, tol_abs, p.config.grid);
            if (cfg.n_eim > 0 && space.n_eim() > cfg.n_eim) {
                // keep the first n_eim greedy picks
                space.z.resize(cfg.n_eim);
                space.stencils.resize(cfg.n_eim);
                Mat psi = space.psi.leftCols(cfg.n_eim);
                // re-cardinalize is unnecessary: leading columns stay cardinal
                space.psi = psi;
            }
            Artifact ea;
            ea.tensors["psi"] = space.psi;
            Vec zv(space.n_eim());
            for (int i = 0; i < space.n_eim(); ++i) zv[i] = space.z[i];
            ea.tensors["z"] = zv;
            ea.meta = common_meta;
            ea.meta["kind"] = "eim";
            ea.meta["tol_eim_rel"] = cfg.tol_eim;
            ea.meta["tol_eim_abs"] = tol_abs;
            ea.meta["tol_reached"] = space.tol_reached;
            ea.meta["n_eim"] = space.n_eim();
            save_artifact(cfg.out_dir + "/eim.dwrom", ea);
            result["eim_path"] = cfg.out_dir + "/eim.dwrom";
            result["n_eim"] = space.n_eim();
        }
    } else {
        EbSnapshots all;
        EbSetup ref_setup = eb_setup(cfg.benchmark, cfg.overrides);
        for (size_t k = 0; k < h0_draws.size(); ++k) {
            EbSetup s = eb_setup(cfg.benchmark,
                                 merge_overrides(cfg.overrides, a0_draws[k], h0_draws[k], {}));
            draws.push_back({{"h0", s.config.h0}, {"a0", s.config.a0}});
            EbSnapshots one = collect_eb_snapshots(s, t_train, cfg.n_snapshots, s.config.h0,
                                                   s.config.a0, static_cast<int>(k));
            all.eta.append(one.eta);
            all.q.append(one.q);
        }
        result["draws"] = draws;
        common_meta["draws"] = draws;

        if (cfg.write_snapshots) {
            Artifact snap;
            snap.tensors["states"] = all.eta.states;
            snap.tensors["fluxes"] = *all.eta.fluxes;
            snap.tensors["states_q"] = all.q.states;
            snap.tensors["fluxes_q"] = *all.q.fluxes;
            snap.meta = common_meta;
            snap.meta["kind"] = "snapshots";
            save_artifact(cfg.out_dir + "/snapshots.dwrom", snap);
            result["snapshots_path"] = cfg.out_dir + "/snapshots.dwrom";
        }

        // Classical L2 Galerkin for the system: Theta = I, W = V.
        ReducedBasis b_eta = pod_basis(all.eta, trunc, TestSpaceMode::Galerkin);
        ReducedBasis b_q = pod_basis(all.q, trunc, TestSpaceMode::Galerkin);

        Artifact ba;
        ba.tensors["v"] = b_eta.v;
        ba.tensors["w"] = b_eta.w;
        ba.tensors["sigma"] = b_eta.sigma;
        ba.tensors["v_q"] = b_q.v;
        ba.tensors["w_q"] = b_q.w;
        ba.tensors["sigma_q"] = b_q.sigma;
        ba.meta = common_meta;
        ba.meta["kind"] = "basis";
        ba.meta["mode"] = "galerkin";
        ba.meta["n_rb_selected"] = b_eta.n_rb;
        ba.meta["n_rb_selected_q"] = b_q.n_rb;
        save_artifact(cfg.out_dir + "/basis.dwrom", ba);
        result["basis_path"] = cfg.out_dir + "/basis.dwrom";
        result["n_rb"] = b_eta.n_rb;
        result["n_rb_q"] = b_q.n_rb;

        if (cfg.tol_eim > 0.0 || cfg.n_eim > 0) {
            const double tol_eta = relative_tol_to_abs(*all.eta.fluxes, std::max(cfg.tol_eim, 0.0));
            const double tol_q = relative_tol_to_abs(*all.q.fluxes, std::max(cfg.tol_eim, 0.0));
            EimSpace se = eim_greedy(*all.eta.fluxes, tol_eta > 0 ? tol_eta : 1e-300,
                                     ref_setup.config.grid);
            EimSpace sq =
                eim_greedy(*all.q.fluxes, tol_q > 0 ? tol_q : 1e-300, ref_setup.config.grid);
            Artifact ea;
            ea.tensors["psi"] = se.psi;
            ea.tensors["psi_q"] = sq.psi;
            Vec ze(se.n_eim()), zq(sq.n_eim());
            for (int i = 0; i < se.n_eim(); ++i) ze[i] = se.z[i];
            for (int i = 0; i < sq.n_eim(); ++i) zq[i] = sq.z[i];
            ea.tensors["z"] = ze;
            ea.tensors["z_q"] = zq;
            ea.meta = common_meta;
            ea.meta["kind"] = "eim";
            ea.meta["tol_eim_rel"] = cfg.tol_eim;
            ea.meta["tol_eim_abs"] = tol_eta;
            ea.meta["tol_eim_abs_q"] = tol_q;
            ea.meta["tol_reached"] = se.tol_reached && sq.tol_reached;
            ea.meta["n_eim"] = se.n_eim();
            ea.meta["n_eim_q"] = sq.n_eim();
            save_artifact(cfg.out_dir + "/eim.dwrom", ea);
            result["eim_path"] = cfg.out_dir + "/eim.dwrom";
            result["n_eim"] = se.n_eim();
            result["n_eim_q"] = sq.n_eim();
        }
    }
    return result;
}

// ---------------------------------------------------------------------------
// online

namespace {

struct LoadedReduction {
    ReducedBasis basis_eta;  // bbm: the only basis
    ReducedBasis basis_q;
    Artifact eim_art;
    bool has_eim = false;
};

LoadedReduction load_or_build_reduction(const RunConfig& cfg) {
    LoadedReduction lr;
    std::string basis_path = cfg.basis_path;
    std::string eim_path = cfg.eim_path;
    if (cfg.offline_inline && basis_path.empty()) {
        RunConfig off = cfg;
        off.out_dir = cfg.out_dir + "/offline";
        const json r = run_offline(off);
        basis_path = r.at("basis_path").get<std::string>();
        if (r.contains("eim_path")) eim_path = r.at("eim_path").get<std::string>();
    }
    const Artifact ba = load_artifact(basis_path);
    lr.basis_eta = truncate_basis(load_basis(ba, ""), cfg.n_rb);
    if (cfg.model == "eb") lr.basis_q = truncate_basis(load_basis(ba, "_q"), cfg.n_rb);
    if (cfg.reduction == "eimrom") {
        if (eim_path.empty()) throw ConfigError("eimrom run needs eim_path");
        lr.eim_art = load_artifact(eim_path);
        lr.has_eim = true;
    }
    return lr;
}

}  // namespace

RunReport run_online(const RunConfig& cfg) {
    ensure_dir(cfg.out_dir);
    RunReport rep;
    rep.model = cfg.model;
    rep.benchmark = cfg.benchmark;
    rep.reduction = cfg.reduction;
    rep.metadata = cfg.raw;
    rep.metadata["seed"] = cfg.seed;

    const CatalogEntry& cat = catalog_lookup(cfg.model, cfg.benchmark);
    BenchmarkOverrides ov = cfg.overrides;
    if (cfg.reduction != "fom" && !ov.t_end)
        ov.t_end = cfg.online_t_end.value_or(cat.online_t_end);
    rep.metadata["provenance"] = cat.provenance;

    try {
        if (cfg.model == "bbm") {
            BbmSetup s = bbm_setup(cfg.benchmark, ov,
                                   cfg.raw.contains("initial")
                                       ? cfg.raw.at("initial").get<std::string>()
                                       : "");
            rep.nh = s.problem.config.grid.nh;
            const double t_end = s.problem.config.t_end;
            const std::vector<double> err_times = uniform_times(t_end, cfg.n_error_samples);
            const std::vector<double> prof_times = uniform_times(t_end, cfg.n_profile_times);

            if (cfg.reduction == "fom") {
                Mat prof;
                BbmState fin;
                TimedRun t = timed(
                    [&]() {
                        fin = bbm_run(s.problem, {s.eta0, 0.0, 0}, t_end, prof_times, &prof);
                    },
                    cfg.timing_reps);
                rep.wall_total = t.total;
                rep.wall_solver = t.solver;
                rep.wall_flux = t.flux;
                rep.wall_other = t.total - t.solver - t.flux;
                rep.n_steps = fin.step_index;
                write_profile_csv(cfg.out_dir + "/profile.csv", prof_times,
                                  s.problem.config.grid.nodes(), prof);
            } else {
                LoadedReduction lr = load_or_build_reduction(cfg);
                rep.n_rb = lr.basis_eta.n_rb;
                const ReducedBbmOps ops = build_bbm_reduced(s.problem, lr.basis_eta);
                PhiOnlyOps phi_ops;
                if (cfg.reduction == "phi_only") phi_ops = build_phi_only(s.problem, lr.basis_eta);
                EimSpace eim;
                if (lr.has_eim) {
                    eim = load_eim_space(lr.eim_art, "", s.problem.config.grid, lr.basis_eta.w);
                    rep.n_eim = eim.n_eim();
                }

                Mat fom_traj;
                TimedRun tf = timed(
                    [&]() { bbm_run(s.problem, {s.eta0, 0.0, 0}, t_end, err_times, &fom_traj); },
                    cfg.timing_reps);
                rep.fom_wall_total = tf.total;

                Mat rom_traj;
                TimedRun tr = timed(
                    [&]() {
                        rom_traj = run_bbm_reduced_traj(cfg.reduction, s.problem, lr.basis_eta,
                                                        ops, lr.has_eim ? &eim : nullptr,
                                                        cfg.reduction == "phi_only" ? &phi_ops
                                                                                    : nullptr,
                                                        s.eta0, t_end, err_times);
                    },
                    cfg.timing_reps);
                rep.wall_total = tr.total;
                rep.wall_solver = tr.solver;
                rep.wall_flux = tr.flux;
                rep.wall_other = tr.total - tr.solver - tr.flux;
                rep.time_ratio = tr.total / tf.total;
                rep.error_l2_final = rom_error(rom_traj, fom_traj, ErrorNorm::L2Final);
                rep.error_l2_avg = rom_error(rom_traj, fom_traj, ErrorNorm::L2TimeAvg);

                Mat prof(rom_traj.rows(), prof_times.size());
                for (size_t k = 0; k < prof_times.size(); ++k) {
                    // nearest error sample; exact for uniform 101/5 splits
                    const int idx =
                        t_end > 0.0 ? static_cast<int>(std::llround(
                                          prof_times[k] / t_end * (cfg.n_error_samples - 1)))
                                    : 0;
                    prof.col(static_cast<int>(k)) = rom_traj.col(idx);
                }
                write_profile_csv(cfg.out_dir + "/profile.csv", prof_times,
                                  s.problem.config.grid.nodes(), prof);
            }
        } else {
            EbSetup s = eb_setup(cfg.benchmark, ov);
            rep.nh = s.config.grid.nh;
            const double t_end = s.config.t_end;
            const std::vector<double> err_times = uniform_times(t_end, cfg.n_error_samples);
            const std::vector<double> prof_times = uniform_times(t_end, cfg.n_profile_times);
            const EbRomVariant variant =
                cfg.eb_variant == "fused" ? EbRomVariant::Fused : EbRomVariant::Psi;

            if (cfg.reduction == "fom") {
                Mat prof;
                TimedRun t = timed(
                    [&]() { eb_run(s.config, s.fem, s.state0, t_end, prof_times, &prof); },
                    cfg.timing_reps);
                rep.wall_total = t.total;
                rep.wall_solver = t.solver;
                rep.wall_flux = t.flux;
                rep.wall_other = t.total - t.solver - t.flux;
                write_profile_csv(cfg.out_dir + "/profile.csv", prof_times, s.config.grid.nodes(),
                                  prof);
            } else {
                LoadedReduction lr = load_or_build_reduction(cfg);
                rep.n_rb = lr.basis_eta.n_rb;
                const ReducedEbOps ops =
                    build_eb_reduced(s.config, s.fem, lr.basis_eta, lr.basis_q);
                EimSpace eim_eta, eim_q;
                if (lr.has_eim) {
                    eim_eta = load_eim_space(lr.eim_art, "", s.config.grid, lr.basis_eta.w);
                    eim_q = load_eim_space(lr.eim_art, "_q", s.config.grid, lr.basis_q.w);
                    rep.n_eim = eim_eta.n_eim();
                }

                Mat fom_eta;
                TimedRun tf = timed(
                    [&]() { eb_run(s.config, s.fem, s.state0, t_end, err_times, &fom_eta); },
                    cfg.timing_reps);
                rep.fom_wall_total = tf.total;

                Mat rom_eta;
                TimedRun tr = timed(
                    [&]() {
                        rom_eta = run_eb_reduced_traj(cfg.reduction, s, lr.basis_eta, lr.basis_q,
                                                      ops, lr.has_eim ? &eim_eta : nullptr,
                                                      lr.has_eim ? &eim_q : nullptr, variant,
                                                      t_end, err_times);
                    },
                    cfg.timing_reps);
                rep.wall_total = tr.total;
                rep.wall_solver = tr.solver;
                rep.wall_flux = tr.flux;
                rep.wall_other = tr.total - tr.solver - tr.flux;
                rep.time_ratio = tr.total / tf.total;
                rep.error_l2_final = rom_error(rom_eta, fom_eta, ErrorNorm::L2Final);
                rep.error_l2_avg = rom_error(rom_eta, fom_eta, ErrorNorm::L2TimeAvg);

                Mat prof(rom_eta.rows(), prof_times.size());
                for (size_t k = 0; k < prof_times.size(); ++k) {
                    const int idx =
                        t_end > 0.0 ? static_cast<int>(std::llround(
                                          prof_times[k] / t_end * (cfg.n_error_samples - 1)))
                                    : 0;
                    prof.col(static_cast<int>(k)) = rom_eta.col(idx);
                }
                write_profile_csv(cfg.out_dir + "/profile.csv", prof_times, s.config.grid.nodes(),
                                  prof);
            }
        }
    } catch (const EimInstabilityError& e) {
        rep.failure_stage = "EIM instability";
        rep.metadata["failure_detail"] = e.what();
    } catch (const SimulationError& e) {
        rep.failure_stage = std::string("simulation abort: ") + e.what();
    }

    std::ofstream os(cfg.out_dir + "/report.json", std::ios::trunc);
    os << rep.to_json().dump(2) << '\n';
    return rep;
}

json RunReport::to_json() const {
    json j;
    j["model"] = model;
    j["benchmark"] = benchmark;
    j["reduction"] = reduction;
    j["nh"] = nh;
    j["n_rb"] = n_rb;
    j["n_eim"] = n_eim;
    j["wall_total"] = wall_total;
    j["wall_solver"] = wall_solver;
    j["wall_flux"] = wall_flux;
    j["wall_other"] = wall_other;
    j["fom_wall_total"] = fom_wall_total;
    j["time_ratio"] = time_ratio;
    j["error_l2_final"] = error_l2_final;
    j["error_l2_avg"] = error_l2_avg;
    j["failure_stage"] = failure_stage;
    j["metadata"] = metadata;
    return j;
}

// ---------------------------------------------------------------------------
// sweep

json run_sweep(const RunConfig& cfg, const SweepSpec& spec) {
    ensure_dir(cfg.out_dir);
    if (cfg.basis_path.empty()) throw ConfigError("sweep needs basis_path");
    const Artifact ba = load_artifact(cfg.basis_path);
    const bool has_eim = !cfg.eim_path.empty();
    Artifact ea;
    if (has_eim) ea = load_artifact(cfg.eim_path);

    json rows = json::array();
    const double t_end = spec.t_end.value_or(catalog_lookup(cfg.model, cfg.benchmark).online_t_end);

    for (int ia = 0; ia < spec.na; ++ia) {
        const double a0 = spec.na == 1 ? spec.a0_lo
                                       : spec.a0_lo + (spec.a0_hi - spec.a0_lo) * ia / (spec.na - 1);
        for (int ih = 0; ih < spec.nh_cells; ++ih) {
            const double h0 =
                spec.nh_cells == 1
                    ? spec.h0_lo
                    : spec.h0_lo + (spec.h0_hi - spec.h0_lo) * ih / (spec.nh_cells - 1);

            BenchmarkOverrides ov = cfg.overrides;
            ov.a0 = a0;
            ov.h0 = h0;
            ov.t_end = t_end;

            double err_pd = std::nan("");
            double err_ei = std::nan("");
            double mu = 0.0;
            try {
                if (cfg.model == "bbm") {
                    BbmSetup s = bbm_setup(cfg.benchmark, ov);
                    mu = h0 / s.problem.config.grid.length();
                    const std::vector<double> times = uniform_times(t_end, cfg.n_error_samples);
                    Mat fom_traj;
                    bbm_run(s.problem, {s.eta0, 0.0, 0}, t_end, times, &fom_traj);

                    ReducedBasis basis = truncate_basis(load_basis(ba, ""), cfg.n_rb);
                    const ReducedBbmOps ops = build_bbm_reduced(s.problem, basis);
                    try {
                        Mat pd = run_bbm_reduced_traj("pdrom", s.problem, basis, ops, nullptr,
                                                      nullptr, s.eta0, t_end, times);
                        err_pd = rom_error(pd, fom_traj, ErrorNorm::L2TimeAvg);
                    } catch (const SimulationError&) {
                    }
                    if (has_eim) {
                        EimSpace eim = load_eim_space(ea, "", s.problem.config.grid, basis.w);
                        try {
                            Mat ei = run_bbm_reduced_traj("eimrom", s.problem, basis, ops, &eim,
                                                          nullptr, s.eta0, t_end, times);
                            err_ei = rom_error(ei, fom_traj, ErrorNorm::L2TimeAvg);
                        } catch (const SimulationError&) {
                        }
                    }
                } else {
                    EbSetup s = eb_setup(cfg.benchmark, ov);
                    mu = h0 / s.config.grid.length();
                    const std::vector<double> times = uniform_times(t_end, cfg.n_error_samples);
                    Mat fom_eta;
                    eb_run(s.config, s.fem, s.state0, t_end, times, &fom_eta);

                    ReducedBasis b_eta = truncate_basis(load_basis(ba, ""), cfg.n_rb);
                    ReducedBasis b_q = truncate_basis(load_basis(ba, "_q"), cfg.n_rb);
                    const ReducedEbOps ops = build_eb_reduced(s.config, s.fem, b_eta, b_q);
                    const EbRomVariant variant =
                        cfg.eb_variant == "fused" ? EbRomVariant::Fused : EbRomVariant::Psi;
                    try {
                        Mat pd = run_eb_reduced_traj("pdrom", s, b_eta, b_q, ops, nullptr, nullptr,
                                                     variant, t_end, times);
                        err_pd = rom_error(pd, fom_eta, ErrorNorm::L2TimeAvg);
                    } catch (const SimulationError&) {
                    }
                    if (has_eim) {
                        EimSpace ee = load_eim_space(ea, "", s.config.grid, b_eta.w);
                        EimSpace eq = load_eim_space(ea, "_q", s.config.grid, b_q.w);
                        try {
                            Mat ei = run_eb_reduced_traj("eimrom", s, b_eta, b_q, ops, &ee, &eq,
                                                         variant, t_end, times);
                            err_ei = rom_error(ei, fom_eta, ErrorNorm::L2TimeAvg);
                        } catch (const SimulationError&) {
                        }
                    }
                }
            } catch (const SimulationError&) {
                // FOM reference itself failed: keep NaN sentinels for the cell
            }
            rows.push_back({{"a0", a0},
                            {"h0", h0},
                            {"eps", a0 / h0},
                            {"mu", mu},
                            {"error_pdrom", err_pd},
                            {"error_eimrom", err_ei}});
        }
    }
    write_sweep_csv(cfg.out_dir + "/sweep.csv", rows);
    json out;
    out["rows"] = rows;
    out["csv"] = cfg.out_dir + "/sweep.csv";
    out["mu_definition"] = "mu = h0 / L with L the domain length";
    return out;
}

// ---------------------------------------------------------------------------
// compare study

json run_compare(const RunConfig& cfg, const CompareSpec& spec) {
    ensure_dir(cfg.out_dir);
    if (cfg.basis_path.empty()) throw ConfigError("compare needs basis_path");
    const Artifact ba = load_artifact(cfg.basis_path);

    const CatalogEntry& cat = catalog_lookup(cfg.model, cfg.benchmark);
    const double t_end = spec.t_end.value_or(cat.online_t_end);
    BenchmarkOverrides ov = cfg.overrides;
    ov.t_end = t_end;

    json rows = json::array();
    const int reps = std::max(cfg.timing_reps, 3);  // ratios use min-of-3 wall times

    if (cfg.model == "bbm") {
        BbmSetup s = bbm_setup(cfg.benchmark, ov);
        const std::vector<double> times = uniform_times(t_end, cfg.n_error_samples);
        Mat fom_traj;
        TimedRun tf = timed(
            [&]() { bbm_run(s.problem, {s.eta0, 0.0, 0}, t_end, times, &fom_traj); }, reps);

        for (int n_rb : spec.n_rb_list) {
            ReducedBasis basis = truncate_basis(load_basis(ba, ""), n_rb);
            const ReducedBbmOps ops = build_bbm_reduced(s.problem, basis);
            Mat traj;
            double err = std::nan("");
            double ratio = std::nan("");
            try {
                TimedRun tr = timed(
                    [&]() {
                        traj = run_bbm_reduced_traj("pdrom", s.problem, basis, ops, nullptr,
                                                    nullptr, s.eta0, t_end, times);
                    },
                    reps);
                err = rom_error(traj, fom_traj, ErrorNorm::L2TimeAvg);
                ratio = tr.total / tf.total;
            } catch (const SimulationError&) {
            }
            rows.push_back({{"n_rb", basis.n_rb}, {"n_eim", 0}, {"error", err},
                            {"time_ratio", ratio}});

            for (double tol_eim : spec.tol_eim_list) {
                if (cfg.snapshots_path.empty())
                    throw ConfigError("compare with tol_eim_list needs snapshots_path");
                const Artifact snap = load_artifact(cfg.snapshots_path);
                const double tol_abs = relative_tol_to_abs(snap.tensor("fluxes"), tol_eim);
                EimSpace eim = eim_greedy(snap.tensor("fluxes"), tol_abs, s.problem.config.grid);
                eim_set_projection(eim, basis.w);
                double err_e = std::nan("");
                double ratio_e = std::nan("");
                try {
                    TimedRun te = timed(
                        [&]() {
                            traj = run_bbm_reduced_traj("eimrom", s.problem, basis, ops, &eim,
                                                        nullptr, s.eta0, t_end, times);
                        },
                        reps);
                    err_e = rom_error(traj, fom_traj, ErrorNorm::L2TimeAvg);
                    ratio_e = te.total / tf.total;
                } catch (const SimulationError&) {
                }
                rows.push_back({{"n_rb", basis.n_rb}, {"n_eim", eim.n_eim()}, {"error", err_e},
                                {"time_ratio", ratio_e}});
            }
        }
    } else {
        EbSetup s = eb_setup(cfg.benchmark, ov);
        const std::vector<double> times = uniform_times(t_end, cfg.n_error_samples);
        Mat fom_eta;
        TimedRun tf =
            timed([&]() { eb_run(s.config, s.fem, s.state0, t_end, times, &fom_eta); }, reps);
        const EbRomVariant variant =
            cfg.eb_variant == "fused" ? EbRomVariant::Fused : EbRomVariant::Psi;

        for (int n_rb : spec.n_rb_list) {
            ReducedBasis b_eta = truncate_basis(load_basis(ba, ""), n_rb);
            ReducedBasis b_q = truncate_basis(load_basis(ba, "_q"), n_rb);
            const ReducedEbOps ops = build_eb_reduced(s.config, s.fem, b_eta, b_q);
            Mat traj;
            double err = std::nan("");
            double ratio = std::nan("");
            try {
                TimedRun tr = timed(
                    [&]() {
                        traj = run_eb_reduced_traj("pdrom", s, b_eta, b_q, ops, nullptr, nullptr,
                                                   variant, t_end, times);
                    },
                    reps);
                err = rom_error(traj, fom_eta, ErrorNorm::L2TimeAvg);
                ratio = tr.total / tf.total;
            } catch (const SimulationError&) {
            }
            rows.push_back({{"n_rb", b_eta.n_rb}, {"n_eim", 0}, {"error", err},
                            {"time_ratio", ratio}});
        }
    }

    write_study_csv(cfg.out_dir + "/study.csv", rows);
    json out;
    out["rows"] = rows;
    out["csv"] = cfg.out_dir + "/study.csv";
    return out;
}

}  // namespace dwrom
