// Experiment runner for the homogeneous relaxation solver library.
//
// Subcommands: simulate, mckean, spectral, arkeryd, morimoto, gfunction,
// verify-weakform, verify-bounds, suite. Global flags: --seed, --workers,
// --out (also BOLTZ_SEED / BOLTZ_WORKERS / BOLTZ_OUT).
//
// Exit codes: 0 all requested checks pass, 1 a certificate failed,
// 2 invalid configuration.
//
// All randomness flows from the root seed through Rng::derived(seed,
// task_id, index); per-index streams make every output byte-identical for a
// fixed config and seed, independent of the worker count.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "boltz/collision.hpp"
#include "boltz/datum.hpp"
#include "boltz/ensemble.hpp"
#include "boltz/gfunction.hpp"
#include "boltz/kernel.hpp"
#include "boltz/mckean.hpp"
#include "boltz/parallel.hpp"
#include "boltz/singular.hpp"
#include "boltz/spectral.hpp"
#include "boltz/weakform.hpp"
#include "json.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace boltz;

namespace {

struct Globals {
    std::uint64_t seed = 1;
    unsigned workers = 1;
    std::string out = ".";
    std::string config_line;  // canonical argv join, hashed into reports
};

std::uint64_t fnv1a(const std::string& s) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

std::vector<double> parse_list(const std::string& s) {
    std::vector<double> out;
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, ','))
        if (!tok.empty()) out.push_back(std::stod(tok));
    if (out.empty()) throw std::invalid_argument("empty numeric list: " + s);
    return out;
}

Vec3 parse_vec3(const std::string& s) {
    auto v = parse_list(s);
    if (v.size() != 3)
        throw std::invalid_argument("expected x,y,z triple: " + s);
    return {v[0], v[1], v[2]};
}

// constant[:value] | powerlaw:alpha | table:x0,b0;x1,b1;...
Kernel parse_kernel(const std::string& spec) {
    auto colon = spec.find(':');
    std::string head = spec.substr(0, colon);
    std::string rest = colon == std::string::npos ? "" : spec.substr(colon + 1);
    if (head == "constant")
        return Kernel::constant(rest.empty() ? 1.0 : std::stod(rest));
    if (head == "powerlaw") {
        if (rest.empty())
            throw std::invalid_argument("powerlaw kernel needs an exponent");
        return Kernel::power_law(std::stod(rest));
    }
    if (head == "table") {
        std::vector<std::pair<double, double>> nodes;
        std::stringstream ss(rest);
        std::string tok;
        while (std::getline(ss, tok, ';')) {
            auto p = parse_list(tok);
            if (p.size() != 2)
                throw std::invalid_argument("table node must be x,b: " + tok);
            nodes.emplace_back(p[0], p[1]);
        }
        return Kernel::tabulated(std::move(nodes));
    }
    throw std::invalid_argument("unknown kernel family: " + head);
}

// gaussian-iso:s2[:mx,my,mz] | gaussian:mx,my,mz:c11,c12,c13,c22,c23,c33 |
// sphere:r | point:x,y,z | two-point:ax,ay,az;bx,by,bz[;p] | file:path
InitialDatum parse_datum(const std::string& spec) {
    auto colon = spec.find(':');
    std::string head = spec.substr(0, colon);
    std::string rest = colon == std::string::npos ? "" : spec.substr(colon + 1);
    if (head == "gaussian-iso") {
        auto c2 = rest.find(':');
        double s2 = std::stod(rest.substr(0, c2));
        Vec3 mean = c2 == std::string::npos ? Vec3{}
                                            : parse_vec3(rest.substr(c2 + 1));
        return InitialDatum::gaussian_iso(s2, mean);
    }
    if (head == "gaussian") {
        auto c2 = rest.find(':');
        if (c2 == std::string::npos)
            throw std::invalid_argument("gaussian needs mean and covariance");
        Vec3 mean = parse_vec3(rest.substr(0, c2));
        auto c = parse_list(rest.substr(c2 + 1));
        if (c.size() != 6)
            throw std::invalid_argument(
                "covariance takes c11,c12,c13,c22,c23,c33");
        Mat3 cov{};
        cov(0, 0) = c[0];
        cov(0, 1) = cov(1, 0) = c[1];
        cov(0, 2) = cov(2, 0) = c[2];
        cov(1, 1) = c[3];
        cov(1, 2) = cov(2, 1) = c[4];
        cov(2, 2) = c[5];
        return InitialDatum::gaussian(mean, cov);
    }
    if (head == "sphere")
        return InitialDatum::sphere_uniform(rest.empty() ? 1.0
                                                         : std::stod(rest));
    if (head == "point") return InitialDatum::point(parse_vec3(rest));
    if (head == "two-point") {
        std::vector<std::string> parts;
        std::stringstream ss(rest);
        std::string tok;
        while (std::getline(ss, tok, ';')) parts.push_back(tok);
        if (parts.size() < 2)
            throw std::invalid_argument("two-point needs two velocities");
        double p = parts.size() > 2 ? std::stod(parts[2]) : 0.5;
        return InitialDatum::two_point(parse_vec3(parts[0]),
                                       parse_vec3(parts[1]), p);
    }
    if (head == "file")
        return InitialDatum::from_ensemble(Ensemble::load_csv(rest));
    throw std::invalid_argument("unknown datum family: " + head);
}

// Effective kernel for samplers: optional truncation, then normalization.
Kernel effective_kernel(const Kernel& k, int trunc) {
    if (trunc > 0) return truncate(k, trunc).normalized;
    return k.normalized();
}

Ensemble wild_ensemble(const InitialDatum& mu0, const AngleSampler& angles,
                       double t, std::size_t m, std::uint64_t seed,
                       std::uint64_t task, unsigned workers) {
    std::vector<Vec3> pts(m);
    VelocitySampler draw = [&mu0](Rng& r) { return mu0.sample(r); };
    parallel_for(m, workers, [&](std::size_t i) {
        Rng rng = Rng::derived(seed, task, i);
        pts[i] = sample_wild(draw, angles, t, rng);
    });
    return Ensemble::from_points(std::move(pts));
}

std::ofstream open_out(const Globals& g, const std::string& name) {
    fs::create_directories(g.out);
    std::ofstream os(fs::path(g.out) / name);
    if (!os) throw std::runtime_error("cannot open output file " + name);
    os.precision(17);
    return os;
}

void write_json(const Globals& g, const std::string& name, json j) {
    j["seed"] = g.seed;
    j["config_hash"] = fnv1a(g.config_line);
    auto os = open_out(g, name);
    os << j.dump(2) << "\n";
}

std::string time_tag(double t) {
    std::ostringstream os;
    os << t;
    return os.str();
}

// Snapshot directory layout: one ensemble CSV per time, named t<value>.csv.
std::vector<std::pair<double, Ensemble>> load_trajectory(
    const std::string& dir) {
    std::vector<std::pair<double, Ensemble>> traj;
    for (const auto& e : fs::directory_iterator(dir)) {
        std::string name = e.path().filename().string();
        if (name.size() < 6 || name[0] != 't' ||
            name.substr(name.size() - 4) != ".csv")
            continue;
        double t = std::stod(name.substr(1, name.size() - 5));
        traj.emplace_back(t, Ensemble::load_csv(e.path().string()));
    }
    if (traj.empty())
        throw std::invalid_argument("no t<value>.csv snapshots in " + dir);
    std::sort(traj.begin(), traj.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    if (traj.front().first != 0.0)
        throw std::invalid_argument("trajectory must start at t = 0");
    return traj;
}

TestFunction parse_psi(const std::string& spec) {
    auto colon = spec.find(':');
    std::string head = spec.substr(0, colon);
    std::string rest = colon == std::string::npos ? "" : spec.substr(colon + 1);
    if (head == "cos") return TestFunction::cosine(parse_vec3(rest));
    if (head == "sin") return TestFunction::sine(parse_vec3(rest));
    if (head == "bump") {
        auto p = parse_list(rest);
        if (p.size() != 4)
            throw std::invalid_argument("bump takes cx,cy,cz,radius");
        return TestFunction::bump({p[0], p[1], p[2]}, p[3]);
    }
    throw std::invalid_argument("unknown test function: " + head);
}

// ---------------------------------------------------------------- simulate

int cmd_simulate(const Globals& g, const std::string& kspec, int trunc,
                 const std::string& dspec, const std::vector<double>& times,
                 std::size_t samples) {
    Kernel kernel = effective_kernel(parse_kernel(kspec), trunc);
    AngleSampler angles(kernel);
    InitialDatum mu0 = parse_datum(dspec);
    auto mom = open_out(g, "moments.csv");
    mom << "t,mean_x,mean_y,mean_z,m2,cov_xx,cov_xy,cov_xz,cov_yy,cov_yz,"
           "cov_zz\n";
    for (std::size_t ti = 0; ti < times.size(); ++ti) {
        double t = times[ti];
        Ensemble e = t == 0.0 ? mu0.draw_ensemble(samples, g.seed, 1000 + ti)
                              : wild_ensemble(mu0, angles, t, samples, g.seed,
                                              1000 + ti, g.workers);
        e.save_csv((fs::path(g.out) / ("t" + time_tag(t) + ".csv")).string());
        MomentSummary m = e.moments();
        mom << t << ',' << m.mean.x << ',' << m.mean.y << ',' << m.mean.z
            << ',' << m.m2;
        const int idx[6][2] = {{0, 0}, {0, 1}, {0, 2}, {1, 1}, {1, 2}, {2, 2}};
        for (auto& ij : idx) mom << ',' << m.cov_raw(ij[0], ij[1]);
        mom << '\n';
    }
    return 0;
}

// ------------------------------------------------------------------ mckean

int cmd_mckean(const Globals& g, const std::string& kspec, int trunc,
               const std::string& dspec, const std::vector<double>& times,
               const std::vector<double>& rhos,
               const std::vector<std::string>& us, std::size_t samples,
               const std::string& report) {
    Kernel kernel = effective_kernel(parse_kernel(kspec), trunc);
    AngleSampler angles(kernel);
    if (report == "second-moment") {
        KernelMoments km = trunc > 0
                               ? kernel_moments(truncate(parse_kernel(kspec),
                                                         trunc))
                               : kernel_moments(kernel);
        auto os = open_out(g, "second_moment.csv");
        os << "t,estimate,se,predicted\n";
        for (double t : times) {
            ScalarEstimate e =
                second_moment_weight(t, angles, samples, g.seed);
            os << t << ',' << e.value << ',' << e.se << ','
               << std::exp(-km.rate * t) << '\n';
        }
        return 0;
    }
    InitialDatum mu0 = parse_datum(dspec);
    std::vector<Vec3> dirs;
    for (const auto& s : us) dirs.push_back(parse_vec3(s).normalized());
    if (dirs.empty()) dirs.push_back({1, 0, 0});
    auto os = open_out(g, "mckean.csv");
    os << "t,rho,u_x,u_y,u_z,re,im,se\n";
    std::uint64_t task = 0;
    for (double t : times)
        for (double rho : rhos)
            for (const Vec3& u : dirs) {
                McKeanEstimate e = estimate_charfn(t, rho, u, mu0, angles,
                                                   samples, g.seed + task);
                ++task;
                os << t << ',' << rho << ',' << u.x << ',' << u.y << ','
                   << u.z << ',' << e.value.real() << ',' << e.value.imag()
                   << ',' << e.se << '\n';
            }
    return 0;
}

// ---------------------------------------------------------------- spectral

int cmd_spectral(const Globals& g, const std::string& kspec, int trunc,
                 const std::string& dspec, double t_end, double dt,
                 double rmax, int cells, int snapshots) {
    Kernel kernel = effective_kernel(parse_kernel(kspec), trunc);
    AngleSampler angles(kernel);
    InitialDatum mu0 = parse_datum(dspec);
    if (!mu0.isotropic())
        throw std::invalid_argument(
            "spectral solver requires an isotropic datum");
    RadialCharFn phi0 = init_radial(
        [&mu0](double r) { return mu0.radial_char_fn(r); }, rmax, cells);
    std::vector<double> out_times;
    for (int k = 0; k <= snapshots; ++k)
        out_times.push_back(t_end * k / snapshots);
    auto snaps = evolve(phi0, angles, out_times, dt);
    auto os = open_out(g, "traj.csv");
    os << "t,r,phi\n";
    for (const auto& s : snaps)
        for (std::size_t i = 0; i < s.phi.r.size(); ++i)
            os << s.t << ',' << s.phi.r[i] << ',' << s.phi.phi[i] << '\n';
    return 0;
}

// ----------------------------------------------------------------- arkeryd

int cmd_arkeryd(const Globals& g, const std::string& kspec,
                const std::string& dspec, std::vector<int> levels,
                const std::vector<double>& times, std::size_t samples,
                const std::string& method) {
    Kernel kernel = parse_kernel(kspec);
    InitialDatum mu0 = parse_datum(dspec);
    ArkerydMethod m = method == "spectral" ? ArkerydMethod::Spectral
                                           : ArkerydMethod::Wild;
    auto probes = default_probe_grid();
    ArkerydReport rep = arkeryd_run(kernel, mu0, levels, times, probes,
                                    samples, g.seed, m);
    CertSummary cs =
        lipschitz_certificates(rep, mu0.m2(), kernel_moments(kernel).Bbar);

    json j;
    j["kernel"] = kspec;
    j["datum"] = dspec;
    j["method"] = method;
    j["levels"] = rep.levels;
    j["times"] = rep.times;
    json vals = json::array();
    for (const auto& e : rep.values)
        vals.push_back({{"level", e.level},
                        {"t", e.t},
                        {"xi", {e.xi.x, e.xi.y, e.xi.z}},
                        {"re", e.phi.real()},
                        {"im", e.phi.imag()},
                        {"se", e.se}});
    j["values"] = std::move(vals);
    json disc = json::array();
    for (const auto& d : rep.discrepancies)
        disc.push_back({{"level_lo", d.level_lo},
                        {"level_hi", d.level_hi},
                        {"sup", d.sup},
                        {"se", d.se}});
    j["discrepancies"] = std::move(disc);
    j["certificates"] = {{"checked_space", cs.checked_space},
                         {"failed_space", cs.failed_space},
                         {"checked_time", cs.checked_time},
                         {"failed_time", cs.failed_time},
                         {"worst_space_slack", cs.worst_space},
                         {"worst_time_slack", cs.worst_time}};
    json fails = json::array();
    for (const auto& f : cs.failures)
        fails.push_back({{"level", f.level},
                         {"t1", f.t1},
                         {"t2", f.t2},
                         {"lhs", f.lhs},
                         {"rhs", f.rhs},
                         {"slack", f.slack}});
    j["failures"] = std::move(fails);
    j["pass"] = cs.all_pass();
    write_json(g, "report.json", std::move(j));
    if (!cs.all_pass()) {
        std::cerr << "arkeryd: " << cs.failures.size()
                  << " certificate rows failed (see report.json)\n";
        return 1;
    }
    return 0;
}

// ----------------------------------------------------------------- morimoto

int cmd_morimoto(const Globals& g, const std::string& mode, double alpha,
                 const std::vector<double>& eps_list, int trials) {
    auto os = open_out(g, "morimoto.csv");
    if (mode == "diverge") {
        os << "eps,value\n";
        std::vector<double> eps = eps_list;
        std::sort(eps.begin(), eps.end(), std::greater<>());
        double prev = -1.0;
        bool monotone = true;
        for (double e : eps) {
            double v = morimoto_divergence(alpha, e);
            if (v < prev) monotone = false;
            prev = v;
            os << e << ',' << v << '\n';
        }
        if (!monotone) {
            std::cerr << "morimoto: divergence integral not monotone in"
                         " decreasing eps\n";
            return 1;
        }
        return 0;
    }
    if (mode != "bound")
        throw std::invalid_argument("morimoto mode must be bound or diverge");
    AngleSampler angles(Kernel::constant(1.0));
    os << "trial,xi_x,xi_y,xi_z,lhs,rhs,pass\n";
    int failed = 0;
    for (int k = 0; k < trials; ++k) {
        Rng rng = Rng::derived(g.seed, 0x6d6f7200u, k);
        // random SPD covariance A A^T + small ridge, random mean and probe
        Mat3 A{};
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) A(i, j) = rng.normal();
        Mat3 cov{};
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) {
                double s = 0.0;
                for (int l = 0; l < 3; ++l) s += A(i, l) * A(j, l);
                cov(i, j) = s + (i == j ? 0.05 : 0.0);
            }
        Vec3 mean = rng.normal3();
        Vec3 xi = rng.normal3() * (0.25 + 2.0 * rng.uniform());
        CharSource chi =
            char_source(InitialDatum::gaussian(mean, cov));
        auto [lhs, rhs] = morimoto_bound(chi, angles, xi);
        bool ok = lhs <= rhs * (1.0 + 1e-9) + 1e-12;
        failed += !ok;
        os << k << ',' << xi.x << ',' << xi.y << ',' << xi.z << ',' << lhs
           << ',' << rhs << ',' << (ok ? 1 : 0) << '\n';
    }
    if (failed) {
        std::cerr << "morimoto: " << failed << "/" << trials
                  << " bound trials failed\n";
        return 1;
    }
    return 0;
}

// ---------------------------------------------------------------- gfunction

int cmd_gfunction(const Globals& g, const std::string& ensemble_csv,
                  const std::string& certify_dir,
                  const std::vector<double>& radii, int max_level) {
    Ensemble mu0 = Ensemble::load_csv(ensemble_csv);
    GFunction G = build_G(mu0, max_level);
    GConstants C = constants(G, mu0.moments().m2);

    json j;
    j["A"] = G.A();
    j["lambda1"] = G.lambda1();
    j["lambda2"] = G.lambda2();
    j["lambda3"] = G.lambda3();
    j["int_G_dgamma"] = G.int_G_dgamma();
    j["m"] = C.m;
    j["C1"] = C.C1;
    j["C"] = C.C;
    j["sup_ratio"] = G.trace().sup_ratio;
    j["bstar_strictly_increasing"] = G.trace().bstar_strictly_increasing;
    j["r"] = G.trace().r;
    j["h"] = G.trace().h;
    write_json(g, "g.json", std::move(j));

    if (certify_dir.empty()) return 0;
    auto traj = load_trajectory(certify_dir);
    auto ui = check_uniform_integrability(traj, G, C.C);
    auto tails = check_tail_bound(traj, G, C.C, radii);
    auto os = open_out(g, "cert.csv");
    os << "kind,arg,value,se,bound,pass\n";
    int failed = 0;
    for (const auto& r : ui) {
        os << "uniform-integrability," << r.t << ',' << r.value << ',' << r.se
           << ',' << r.bound << ',' << (r.pass ? 1 : 0) << '\n';
        failed += !r.pass;
    }
    for (const auto& r : tails) {
        os << "tail-energy," << r.R << ',' << r.sup_tail << ',' << r.se << ','
           << r.bound << ',' << (r.pass ? 1 : 0) << '\n';
        failed += !r.pass;
    }
    if (failed) {
        std::cerr << "gfunction: " << failed
                  << " certificate rows failed (see cert.csv)\n";
        return 1;
    }
    return 0;
}

// ----------------------------------------------------------- verify-weakform

int cmd_verify_weakform(const Globals& g, const std::string& traj_dir,
                        const std::string& kspec, int trunc,
                        const std::vector<std::string>& psis,
                        std::size_t pairs) {
    Kernel kernel = effective_kernel(parse_kernel(kspec), trunc);
    AngleSampler angles(kernel);
    auto traj = load_trajectory(traj_dir);
    auto os = open_out(g, "residuals.csv");
    os << "psi,t,residual,uncertainty,pass\n";
    int failed = 0;
    for (const auto& spec : psis) {
        TestFunction psi = parse_psi(spec);
        WeakformConfig cfg;
        cfg.pair_budget = pairs;
        cfg.seed = g.seed;
        auto rows = weak_residual(traj, psi, angles, cfg);
        for (const auto& r : rows) {
            bool ok = std::abs(r.residual) <= 4.0 * r.uncertainty + 1e-3;
            failed += !ok;
            os << spec << ',' << r.t << ',' << r.residual << ','
               << r.uncertainty << ',' << (ok ? 1 : 0) << '\n';
        }
    }
    if (failed) {
        std::cerr << "verify-weakform: " << failed
                  << " residual rows outside tolerance\n";
        return 1;
    }
    return 0;
}

// ------------------------------------------------------------- verify-bounds

int cmd_verify_bounds(const Globals& g, int grid, int points, int trials,
                      double require_first) {
    std::vector<double> s_grid(grid), xi_grid(grid);
    for (int i = 0; i < grid; ++i) {
        s_grid[i] = (i + 0.5) / grid;
        xi_grid[i] = (i + 0.5) / grid;
    }
    SupCheck sc = villani_sup_check(s_grid, xi_grid);

    // closed-form derivative norms against finite differences of the
    // post-collision curve
    double max_fd_err = 0.0;
    Rng rng = Rng::derived(g.seed, 0x76620000u);
    for (int k = 0; k < points; ++k) {
        double d = 0.1 + 4.0 * rng.uniform();
        double x = rng.uniform(-0.99, 0.99);
        Vec3 v = rng.normal3();
        Vec3 w = v + rng.normal3().normalized() * d;
        Vec3 u = (w - v).normalized();
        CollisionFrame fr = orthobasis(u);
        auto vstar = [&](double y) {
            double phi = std::acos(std::clamp(y, -1.0, 1.0));
            return post_collision(v, w, 0.3, phi).first;
        };
        double h = 1e-5;
        Vec3 d1 = (vstar(x + h) - vstar(x - h)) * (1.0 / (2.0 * h));
        Vec3 d2 = (vstar(x + h) + vstar(x - h) - vstar(x) * 2.0) *
                  (1.0 / (h * h));
        auto [first_sq, second] = derivative_norms(d, x);
        max_fd_err = std::max(max_fd_err,
                              std::abs(d1.norm2() - first_sq) /
                                  std::max(1.0, first_sq));
        max_fd_err = std::max(max_fd_err, std::abs(d2.norm() - second) /
                                              std::max(1.0, second));
    }
    bool fd_ok = max_fd_err < 1e-4;
    bool first_floor_ok = sc.max_first <= require_first;

    AngleSampler angles(Kernel::constant(1.0));
    int bound_failed = 0;
    for (int k = 0; k < trials; ++k) {
        Rng tr = Rng::derived(g.seed, 0x76620001u, k);
        Vec3 mean = tr.normal3();
        double s2 = 0.2 + 2.0 * tr.uniform();
        Vec3 xi = tr.normal3();
        CharSource chi = char_source(InitialDatum::gaussian_iso(s2, mean));
        auto [lhs, rhs] = morimoto_bound(chi, angles, xi);
        bound_failed += !(lhs <= rhs * (1.0 + 1e-9) + 1e-12);
    }

    json j;
    j["sup_first"] = sc.max_first;
    j["sup_second"] = sc.max_second;
    j["pass_first"] = sc.pass_first;
    j["pass_second"] = sc.pass_second;
    j["first_within_required"] = first_floor_ok;
    j["max_derivative_fd_error"] = max_fd_err;
    j["derivatives_pass"] = fd_ok;
    j["bound_trials"] = trials;
    j["bound_failed"] = bound_failed;
    bool pass = sc.pass_first && sc.pass_second && fd_ok && first_floor_ok &&
                bound_failed == 0;
    j["pass"] = pass;
    write_json(g, "bounds.json", std::move(j));
    if (!pass) {
        std::cerr << "verify-bounds: a bound check failed (see bounds.json)\n";
        return 1;
    }
    return 0;
}

// ------------------------------------------------------------------- suite

int cmd_suite(const Globals& g, std::size_t samples) {
    json j;
    bool pass = true;
    auto record = [&](const std::string& name, bool ok, json detail) {
        detail["pass"] = ok;
        j[name] = std::move(detail);
        pass = pass && ok;
        std::cout << (ok ? "PASS " : "FAIL ") << name << "\n";
    };

    // conservation of mean and energy under the particle flow
    Kernel kc = Kernel::constant(1.0);
    AngleSampler angles(kc);
    Mat3 cov{};
    cov(0, 0) = 0.5;
    cov(1, 1) = 1.0;
    cov(2, 2) = 1.0;
    cov(1, 2) = cov(2, 1) = 0.5;
    InitialDatum mu0 = InitialDatum::gaussian({0.3, -0.1, 0.2}, cov);
    double m2_0 = mu0.m2();
    Vec3 mean_0 = mu0.mean_vec();
    bool cons_ok = true;
    json cons = json::array();
    for (double t : {0.5, 2.0}) {
        Ensemble e =
            wild_ensemble(mu0, angles, t, samples, g.seed, 1, g.workers);
        MomentSummary m = e.moments();
        double se = std::sqrt(m.centered_energy / double(samples));
        bool ok = (m.mean - mean_0).norm() <= 4.0 * se &&
                  std::abs(m.m2 - m2_0) <= 8.0 * se;
        cons_ok = cons_ok && ok;
        cons.push_back({{"t", t},
                        {"mean_err", (m.mean - mean_0).norm()},
                        {"m2_err", std::abs(m.m2 - m2_0)},
                        {"se", se}});
    }
    record("conservation", cons_ok, {{"rows", cons}});

    // branching-tree estimator versus the series sampler at t = 1
    InitialDatum sph = InitialDatum::sphere_uniform(1.0);
    Ensemble we = wild_ensemble(sph, angles, 1.0, samples, g.seed, 2,
                                g.workers);
    bool mk_ok = true;
    json mk = json::array();
    for (int k = 0; k < 5; ++k) {
        Rng rng = Rng::derived(g.seed, 3, k);
        double rho = 0.2 + 2.0 * rng.uniform();
        Vec3 u = rng.unit_vector();
        McKeanEstimate a =
            estimate_charfn(1.0, rho, u, sph, angles, samples, g.seed + k);
        CharFnValue b = we.char_fn(u * rho);
        double tol = 4.0 * std::hypot(a.se, b.se);
        bool ok = std::abs(a.value - b.value) <= tol;
        mk_ok = mk_ok && ok;
        mk.push_back({{"rho", rho},
                      {"diff", std::abs(a.value - b.value)},
                      {"tol", tol}});
    }
    record("mckean-vs-wild", mk_ok, {{"rows", mk}});

    // deterministic radial oracle versus the particle transform at t = 1
    RadialCharFn phi0 = init_radial(
        [&sph](double r) { return sph.radial_char_fn(r); }, 8.0, 512);
    auto snaps = evolve(phi0, angles, {1.0}, 0.01);
    bool sp_ok = true;
    double worst = 0.0;
    for (double r : {0.5, 1.0, 2.0, 4.0}) {
        CharFnValue c = we.char_fn({r, 0, 0});
        double diff = std::abs(c.value.real() - snaps[0].phi(r));
        worst = std::max(worst, diff);
        sp_ok = sp_ok && diff <= 5e-3 + 4.0 * c.se;
    }
    record("spectral-oracle", sp_ok, {{"max_diff", worst}});

    // sup bounds behind the collision-integral Taylor estimates
    std::vector<double> sg(200), xg(200);
    for (int i = 0; i < 200; ++i) {
        sg[i] = (i + 0.5) / 200.0;
        xg[i] = (i + 0.5) / 200.0;
    }
    SupCheck sc = villani_sup_check(sg, xg);
    record("taylor-sup-bounds", sc.pass_first && sc.pass_second,
           {{"sup_first", sc.max_first}, {"sup_second", sc.max_second}});

    write_json(g, "suite.json", std::move(j));
    return pass ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Homogeneous relaxation solver and verifier"};
    app.require_subcommand(1);

    Globals g;
    {
        std::ostringstream line;
        for (int i = 1; i < argc; ++i) line << argv[i] << ' ';
        g.config_line = line.str();
    }
    app.add_option("--seed", g.seed, "root rng seed")
        ->envname("BOLTZ_SEED");
    app.add_option("--workers", g.workers, "worker thread count")
        ->envname("BOLTZ_WORKERS");
    app.add_option("--out", g.out, "output directory")
        ->envname("BOLTZ_OUT");

    std::string kspec = "constant", dspec = "gaussian-iso:1.0";
    int trunc = 0;
    std::string t_list = "1", rho_list = "1";
    std::vector<std::string> us, psis;
    std::size_t samples = 10000;

    auto* sim = app.add_subcommand("simulate", "sample the flow, emit CSVs");
    sim->add_option("--kernel", kspec);
    sim->add_option("--trunc", trunc);
    sim->add_option("--init", dspec);
    sim->add_option("--t", t_list, "comma separated times");
    sim->add_option("--samples", samples);

    std::string report;
    auto* mck = app.add_subcommand("mckean", "branching-tree estimator");
    mck->add_option("--kernel", kspec);
    mck->add_option("--trunc", trunc);
    mck->add_option("--init", dspec);
    mck->add_option("--t", t_list);
    mck->add_option("--rho", rho_list);
    mck->add_option("--u", us, "probe directions x,y,z (repeatable)");
    mck->add_option("--samples", samples);
    mck->add_option("--report", report, "second-moment");

    double t_end = 2.0, dt = 0.01, rmax = 8.0;
    int cells = 256, snapshots = 4;
    auto* spc = app.add_subcommand("spectral", "radial transform solver");
    spc->add_option("--kernel", kspec);
    spc->add_option("--trunc", trunc);
    spc->add_option("--init", dspec);
    spc->add_option("--t-end", t_end);
    spc->add_option("--dt", dt);
    spc->add_option("--rmax", rmax);
    spc->add_option("--cells", cells);
    spc->add_option("--snapshots", snapshots);

    std::string levels_list = "4,16,64", method = "wild";
    auto* ark = app.add_subcommand("arkeryd", "truncation ladder + certificates");
    ark->add_option("--kernel", kspec);
    ark->add_option("--init", dspec);
    ark->add_option("--levels", levels_list);
    ark->add_option("--t", t_list);
    ark->add_option("--samples", samples);
    ark->add_option("--method", method, "wild | spectral");

    std::string mode = "bound", eps_list = "1e-2,1e-3,1e-4";
    double alpha = 2.5;
    int trials = 100;
    auto* mor = app.add_subcommand("morimoto", "second-moment fourier bound");
    mor->add_option("--mode", mode, "bound | diverge");
    mor->add_option("--alpha", alpha);
    mor->add_option("--eps-list", eps_list);
    mor->add_option("--trials", trials);

    std::string from_ensemble, certify_dir, radii_list = "1,2,4,8";
    int max_level = 48;
    auto* gfn = app.add_subcommand("gfunction", "superlinear gauge builder");
    gfn->add_option("--from-ensemble", from_ensemble)->required();
    gfn->add_option("--certify", certify_dir,
                    "directory of t<value>.csv snapshots");
    gfn->add_option("--radii", radii_list);
    gfn->add_option("--max-level", max_level);

    std::string traj_dir;
    std::size_t pairs = 20000;
    auto* vwf = app.add_subcommand("verify-weakform", "residual certificates");
    vwf->add_option("--traj", traj_dir)->required();
    vwf->add_option("--kernel", kspec);
    vwf->add_option("--trunc", trunc);
    vwf->add_option("--psi", psis, "cos:x,y,z | sin:x,y,z | bump:cx,cy,cz,r")
        ->required();
    vwf->add_option("--pairs", pairs);

    int grid = 400, points = 200;
    double require_first = 14.0;
    auto* vb = app.add_subcommand("verify-bounds", "analytic sup bounds");
    vb->add_option("--grid", grid);
    vb->add_option("--points", points);
    vb->add_option("--trials", trials);
    vb->add_option("--require-first", require_first,
                   "extra ceiling on the first sup (tightens the check)");

    auto* ste = app.add_subcommand("suite", "cross-module smoke certificates");
    ste->add_option("--samples", samples);

    // allow the global flags after the subcommand name
    for (CLI::App* sub : app.get_subcommands(
             [](const CLI::App*) { return true; }))
        sub->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (sim->parsed())
            return cmd_simulate(g, kspec, trunc, dspec, parse_list(t_list),
                                samples);
        if (mck->parsed())
            return cmd_mckean(g, kspec, trunc, dspec, parse_list(t_list),
                              parse_list(rho_list), us, samples, report);
        if (spc->parsed())
            return cmd_spectral(g, kspec, trunc, dspec, t_end, dt, rmax,
                                cells, snapshots);
        if (ark->parsed()) {
            std::vector<int> levels;
            for (double v : parse_list(levels_list))
                levels.push_back(int(v));
            return cmd_arkeryd(g, kspec, dspec, levels, parse_list(t_list),
                               samples, method);
        }
        if (mor->parsed())
            return cmd_morimoto(g, mode, alpha, parse_list(eps_list), trials);
        if (gfn->parsed())
            return cmd_gfunction(g, from_ensemble, certify_dir,
                                 parse_list(radii_list), max_level);
        if (vwf->parsed())
            return cmd_verify_weakform(g, traj_dir, kspec, trunc, psis,
                                       pairs);
        if (vb->parsed())
            return cmd_verify_bounds(g, grid, points, trials, require_first);
        if (ste->parsed()) return cmd_suite(g, samples);
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::domain_error& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}
