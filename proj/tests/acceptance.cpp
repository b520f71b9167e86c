// Acceptance suite: one pass/fail line per criterion, nonzero exit on any
// failure. Criteria cover oracle accuracy, energy balance, convergence
// orders, stability-bound certification sweeps, constant arithmetic, the
// identity/inequality suites and Wood-anomaly handling.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <sstream>
#include <vector>

#include "grating/runner.hpp"

using namespace grating;
using cd = std::complex<double>;

namespace {

const cd I(0.0, 1.0);
int g_failures = 0;

void report(int criterion, bool pass, const std::string& detail, double seconds) {
    std::printf("[%s] criterion %d: %s (%.1fs)\n", pass ? "PASS" : "FAIL", criterion,
                detail.c_str(), seconds);
    std::fflush(stdout);
    if (!pass) ++g_failures;
}

template <typename F>
void run_criterion(int id, F&& body) {
    auto t0 = std::chrono::steady_clock::now();
    bool pass = false;
    std::string detail;
    try {
        pass = body(detail);
    } catch (const std::exception& e) {
        detail = std::string("exception: ") + e.what();
    }
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    report(id, pass, detail, secs);
}

struct LevelDiagnostics {
    double defect_exact;
    double defect_sampled;
    double dissipation;
    double solver_residual;
};

/// Solves one configuration on a refinement chain and reports the balance
/// diagnostics per level.
std::vector<LevelDiagnostics> balance_levels(const std::string& profile, const std::string& bc,
                                             double k, double theta_deg, double k_minus,
                                             double lambda, int levels, double h0, int N) {
    RunConfig cfg;
    cfg.profile = profile;
    cfg.bc = bc;
    cfg.mesh_h = h0;
    cfg.refinements = 0;
    cfg.dtn_N = N;
    cfg.lambda = lambda;
    cfg.k_minus = k_minus;
    if (bc == "transmission") {
        // a slim strip keeps the finest direct solve inside the memory budget
        cfg.f_minus = -0.5;
        cfg.f_plus = 0.5;
        cfg.R = 1.0;
    }
    GeometryBundle geom = prepare_geometry(cfg);
    std::vector<std::shared_ptr<const PeriodicMesh>> meshes = geom.meshes;
    while (static_cast<int>(meshes.size()) < levels)
        meshes.push_back(std::make_shared<PeriodicMesh>(refine(*meshes.back())));

    IncidentWave wave = make_incident_wave(k, theta_deg * M_PI / 180.0, cd(1.0, 0.0));
    const bool transmission = bc == "transmission";
    BoundaryModel model = boundary_model(cfg);

    std::vector<LevelDiagnostics> out;
    for (const auto& mesh : meshes) {
        auto space = make_fe_space(mesh, 2);
        SolveInfo info;
        DiscreteField u =
            transmission
                ? solve(assemble_transmission(space, wave, k_minus, lambda, N), &info)
                : (bc == "impedance" ? solve(assemble_impedance(space, wave, lambda, N), &info)
                                     : solve(assemble_dirichlet(space, wave, N), &info));
        RayleighSpectrum up = scattered_spectrum(rayleigh_coefficients(u, mesh->R, N), wave);
        std::optional<RayleighSpectrum> down;
        if (transmission)
            down = transmitted_spectrum(rayleigh_coefficients(u, -mesh->R, N), k_minus);
        LevelDiagnostics diag{};
        diag.defect_exact = efficiencies(up, down, wave, model).balance_defect;
        int M = std::max(4 * static_cast<int>(space->top_trace.size()), 4 * N + 4);
        RayleighSpectrum up_s =
            scattered_spectrum(rayleigh_coefficients_sampled(u, mesh->R, N, M), wave);
        std::optional<RayleighSpectrum> down_s;
        if (transmission)
            down_s = transmitted_spectrum(rayleigh_coefficients_sampled(u, -mesh->R, N, M),
                                          k_minus);
        diag.defect_sampled = efficiencies(up_s, down_s, wave, model).balance_defect;
        diag.solver_residual = info.residual;
        if (bc == "impedance") {
            RayleighSpectrum trace = rayleigh_coefficients(u, mesh->R, N);
            double tr = profile_trace_norm(u);
            cd tuu = dtn_quadratic_form(trace, DtnVariant::T, wave.k);
            cd fu = discrete_functional(u, wave);
            double scale = lambda * tr * tr + std::abs(tuu.imag()) + std::abs(fu.imag());
            diag.dissipation = std::abs(lambda * tr * tr + tuu.imag() + fu.imag()) / scale;
        }
        out.push_back(diag);
    }
    return out;
}

/// Runs one certification family through the sweep runner and checks that
/// every eligible row certifies with ratio <= 1.
struct FamilyOutcome {
    int certified = 0;
    int wood_skipped = 0;
    int other = 0;
    double max_ratio = 0.0;
    double min_ratio = 1e300;
    bool ok = true;
    std::string note;
};

FamilyOutcome certification_family(RunConfig cfg) {
    FamilyOutcome out;
    for (const SolveRecord& row : run_sweep(cfg)) {
        if (row.status != "ok") {
            out.ok = false;
            out.note = "solver failure at k=" + std::to_string(row.k);
            continue;
        }
        if (row.stability.status == CertificationStatus::NoCertificateWood) {
            ++out.wood_skipped;
            continue;
        }
        if (row.stability.status == CertificationStatus::Certified) {
            ++out.certified;
            out.max_ratio = std::max(out.max_ratio, row.stability.ratio);
            out.min_ratio = std::min(out.min_ratio, row.stability.ratio);
            continue;
        }
        ++out.other;
        out.ok = false;
        out.note = "uncertified row at k=" + std::to_string(row.k) +
                   " theta=" + std::to_string(row.theta_deg);
    }
    if (out.certified == 0) {
        out.ok = false;
        out.note = "no certified rows";
    }
    return out;
}

std::string fmt1(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2e", v);
    return buf;
}

} // namespace

int main() {
    // 1. flat-Dirichlet oracle match
    run_criterion(1, [](std::string& detail) {
        RunConfig cfg;
        cfg.bc = "dirichlet";
        cfg.profile = "flat(0)";
        cfg.R = 1.0;
        cfg.mesh_h = 0.1;
        cfg.refinements = 0;
        GeometryBundle geom = prepare_geometry(cfg);
        auto space = make_fe_space(geom.meshes[0], 2);
        double max_l2 = 0.0, max_coef = 0.0;
        for (double k : {0.5, 1.0, 2.0}) {
            for (double theta : {0.0, 30.0, 60.0}) {
                IncidentWave wave = make_incident_wave(k, theta * M_PI / 180.0, cd(1.0, 0.0));
                DiscreteField u = solve(assemble_dirichlet(space, wave, 12));
                FlatDirichletOracle oracle = flat_dirichlet_oracle(wave, 0.0);
                max_l2 = std::max(max_l2, field_error(u, oracle.field.value, nullptr, 8).rel_l2());
                RayleighSpectrum sc =
                    scattered_spectrum(rayleigh_coefficients(u, 1.0, 12), wave);
                max_coef = std::max(max_coef, std::abs(sc.at_order(0) / wave.gamma - oracle.u0));
            }
        }
        detail = "flat Dirichlet oracle: max rel L2 " + fmt1(max_l2) + ", max u0 error " +
                 fmt1(max_coef) + " (tol 1e-3)";
        return max_l2 <= 1e-3 && max_coef <= 1e-3;
    });

    // 2. flat impedance and transmission oracles
    run_criterion(2, [](std::string& detail) {
        double max_imp = 0.0;
        {
            RunConfig cfg;
            cfg.bc = "impedance";
            cfg.profile = "flat(0)";
            cfg.R = 1.0;
            cfg.mesh_h = 0.1;
            GeometryBundle geom = prepare_geometry(cfg);
            auto space = make_fe_space(geom.meshes[0], 2);
            for (double k : {0.5, 1.0, 2.0}) {
                for (double theta : {0.0, 30.0, 60.0}) {
                    for (double lambda : {0.5, 1.0, 2.0}) {
                        IncidentWave wave =
                            make_incident_wave(k, theta * M_PI / 180.0, cd(1.0, 0.0));
                        DiscreteField u = solve(assemble_impedance(space, wave, lambda, 12));
                        RayleighSpectrum sc =
                            scattered_spectrum(rayleigh_coefficients(u, 1.0, 12), wave);
                        cd exact = flat_impedance_oracle(wave, lambda, 0.0).reflection;
                        max_imp = std::max(max_imp, std::abs(sc.at_order(0) - exact));
                    }
                }
            }
        }
        double max_tr = 0.0;
        {
            RunConfig cfg;
            cfg.bc = "transmission";
            cfg.profile = "flat(0)";
            cfg.R = 2.0;
            cfg.mesh_h = 0.1;
            cfg.k_minus = 0.5;
            GeometryBundle geom = prepare_geometry(cfg);
            auto space = make_fe_space(geom.meshes[0], 2);
            for (double k : {0.5, 1.0, 2.0}) {
                for (double k_minus : {0.5, 2.0}) {
                    if (k == k_minus) continue;
                    for (double theta : {0.0, 30.0, 60.0}) {
                        for (double lambda : {0.5, 1.0, 2.0}) {
                            IncidentWave wave =
                                make_incident_wave(k, theta * M_PI / 180.0, cd(1.0, 0.0));
                            DiscreteField u =
                                solve(assemble_transmission(space, wave, k_minus, lambda, 13));
                            RayleighSpectrum up = scattered_spectrum(
                                rayleigh_coefficients(u, 2.0, 13), wave);
                            RayleighSpectrum dn = transmitted_spectrum(
                                rayleigh_coefficients(u, -2.0, 13), k_minus);
                            FlatTransmissionOracle oracle =
                                flat_transmission_oracle(wave, k_minus, lambda);
                            max_tr = std::max(max_tr, std::abs(up.at_order(0) - oracle.r));
                            max_tr = std::max(max_tr, std::abs(dn.at_order(0) - oracle.t));
                        }
                    }
                }
            }
        }
        detail = "reflection/transmission coefficients: impedance err " + fmt1(max_imp) +
                 ", Fresnel err " + fmt1(max_tr) + " (tol 1e-3)";
        return max_imp <= 1e-3 && max_tr <= 1e-3;
    });

    // 3. energy balance under refinement + impedance dissipation identity
    run_criterion(3, [](std::string& detail) {
        bool ok = true;
        double worst_exact = 0.0, worst_factor = 1e300;
        for (const char* profile : {"flat(0)", "sine(0.3)"}) {
            for (const char* bc : {"dirichlet", "transmission"}) {
                auto levels = balance_levels(profile, bc, 1.3, 20.0,
                                             std::string(bc) == "transmission" ? 2.0 : 0.0, 1.0,
                                             2, 0.1, 16);
                worst_exact = std::max(worst_exact, levels[0].defect_exact);
                ok = ok && levels[0].defect_exact <= 1e-2;
                for (size_t l = 1; l < levels.size(); ++l) {
                    double prev = levels[l - 1].defect_sampled;
                    double cur = levels[l].defect_sampled;
                    if (cur > 1e-12) { // above the floating-point floor the decay must show
                        worst_factor = std::min(worst_factor, prev / cur);
                        ok = ok && prev / cur >= 4.0;
                    }
                }
            }
        }
        auto imp = balance_levels("flat(0)", "impedance", 1.3, 20.0, 0.0, 1.0, 1, 0.1, 16);
        double diss = imp[0].dissipation;
        double res = imp[0].solver_residual;
        ok = ok && diss <= 10.0 * std::max(res, 1e-15);
        detail = "balance defect at h=0.1 " + fmt1(worst_exact) + " (tol 1e-2), sampled decay x" +
                 fmt1(worst_factor == 1e300 ? 4.0 : worst_factor) +
                 " per level (need >= 4), dissipation residual " + fmt1(diss) + " vs solver " +
                 fmt1(res);
        return ok;
    });

    // 4. convergence orders for flat Dirichlet
    run_criterion(4, [](std::string& detail) {
        GratingProfile flat = build_profile(parse_profile_spec("flat(0)"), 8);
        IncidentWave wave = make_incident_wave(1.0, 30.0 * M_PI / 180.0, cd(1.0, 0.0));
        ConvergenceStudy s1 = convergence_study(flat, 1.0, wave, DirichletBC{}, 0.35, 4, 1, 12);
        ConvergenceStudy s2 = convergence_study(flat, 1.0, wave, DirichletBC{}, 0.35, 4, 2, 12);
        detail = "L2 slopes: order 1 -> " + fmt1(s1.l2_slope) + " (need 1.8..2.2), order 2 -> " +
                 fmt1(s2.l2_slope) + " (need 2.7..3.3)";
        return s1.l2_slope >= 1.8 && s1.l2_slope <= 2.2 && s2.l2_slope >= 2.7 &&
               s2.l2_slope <= 3.3 && s1.monotone && s2.monotone;
    });

    // 5. stability-bound certification sweeps
    run_criterion(5, [](std::string& detail) {
        bool ok = true;
        int certified = 0, wood = 0;
        double max_ratio = 0.0;
        std::string note;
        auto absorb = [&](const FamilyOutcome& fam) {
            ok = ok && fam.ok;
            certified += fam.certified;
            wood += fam.wood_skipped;
            max_ratio = std::max(max_ratio, fam.max_ratio);
            if (!fam.ok && note.empty()) note = fam.note;
        };

        for (const char* profile : {"flat(0)", "sine(0.3)"}) {
            RunConfig dir;
            dir.bc = "dirichlet";
            dir.profile = profile;
            dir.mesh_h = 0.16;
            dir.refinements = 1;
            dir.k = {0.5, 1.0, 2.0};
            dir.theta_deg = {0.0, 30.0, -30.0, 60.0, -60.0, 80.0, -80.0};
            absorb(certification_family(dir));

            for (double lambda : {0.5, 1.0, 2.0}) {
                RunConfig imp = dir;
                imp.bc = "impedance";
                imp.lambda = lambda;
                absorb(certification_family(imp));
            }

            RunConfig tc1 = dir;
            tc1.bc = "transmission";
            tc1.k = {2.0};
            tc1.k_minus = 1.0;
            tc1.lambda = 1.0;
            absorb(certification_family(tc1));

            RunConfig tc2 = tc1;
            tc2.k = {1.0};
            tc2.k_minus = 2.0;
            absorb(certification_family(tc2));
        }
        detail = "certified " + std::to_string(certified) + " rows, max ratio " +
                 fmt1(max_ratio) + " (<= 1), " + std::to_string(wood) + " Wood rows skipped" +
                 (note.empty() ? "" : "; " + note);
        return ok && max_ratio <= 1.0;
    });

    // 6. constant arithmetic and internal consistency
    run_criterion(6, [](std::string& detail) {
        DirichletBoundResult hand = dirichlet_bound(1.0, 0.0, cd(1.0, 0.0), 1.0, -1.0);
        double errM = std::abs(hand.M - 73.0) / 73.0;
        double errC = std::abs(hand.C - std::sqrt(5361.0)) / std::sqrt(5361.0);
        bool ok = errM <= 1e-12 && errC <= 1e-12;
        double worst = 0.0;
        for (double k : {0.5, 1.0, 2.0, 3.3}) {
            for (double d : {1.5, 2.0, 4.0, 6.5}) {
                DirichletBoundResult r = dirichlet_bound(k, 0.31, cd(1.0, 0.0), d, 0.0);
                double rhs = k * r.M * r.M + 4.0 * std::pow(k, 4) * d * d * d;
                worst = std::max(worst, std::abs(r.C * r.C - rhs) / rhs);
                for (double lambda : {0.5, 1.0, 2.0}) {
                    ImpedanceBoundResult ir =
                        impedance_bound(k, 0.31, cd(1.0, 0.0), lambda, d, 0.0, 0.4);
                    double inner = 1.0 + 4.0 * k * k * ir.Ctilde2 / lambda;
                    double rhs2 = k * inner * inner + 8.0 * std::pow(k, 4) * ir.Ctilde2;
                    worst = std::max(worst, std::abs(ir.Cstar * ir.Cstar - rhs2) / rhs2);
                }
            }
        }
        ok = ok && worst <= 1e-14;
        detail = "hand case M err " + fmt1(errM) + ", C err " + fmt1(errC) +
                 " (tol 1e-12); consistency identities worst " + fmt1(worst) + " (tol 1e-14)";
        return ok;
    });

    // 7. identity and inequality suites
    run_criterion(7, [](std::string& detail) {
        GratingProfile flat = build_profile(parse_profile_spec("flat(0)"), 8);
        TruncatedDomain dom = make_domain(flat, 1.3, DomainKind::OneSided);
        double rellich = 0.0;
        rellich = std::max(rellich,
                           rellich_residual(plane_wave_mode(1.4, 0.3, 1, true, cd(0.8, -0.4)),
                                            flat.f_minus, dom, 1.4, 8));
        rellich = std::max(rellich,
                           rellich_residual(sum(plane_wave_mode(1.1, -0.2, 0, true, cd(1.0, 0.2)),
                                                plane_wave_mode(1.1, -0.2, 2, false, cd(0.1, 0.6))),
                                            flat.f_minus, dom, 1.1, 8));
        bool ok = rellich <= 1e-10;

        CheckSummary tr = trace_inequality_suite(1000, 7261);
        CheckSummary po = poincare_suite(1000, 7262);
        CheckSummary ma = mode_amplitude_suite(1000, 7263);
        ok = ok && tr.pass && po.pass && ma.pass;

        double worst_aux = 0.0;
        bool aux_ok = true;
        for (double k : {0.6, 1.0, 1.6}) {
            for (double theta : {10.0, 30.0, 55.0}) {
                IncidentWave wave = make_incident_wave(k, theta * M_PI / 180.0, cd(1.0, 0.0));
                AuxiliaryCheck ac = auxiliary_bound_check(flat, 2.2, wave, 1.0, 0.18, 2, 12);
                worst_aux = std::max(worst_aux, ac.ratio);
                aux_ok = aux_ok && ac.pass;
            }
        }
        ok = ok && aux_ok;
        detail = "Rellich residual " + fmt1(rellich) + " (tol 1e-10); suite margins " +
                 fmt1(std::min({tr.min_rel_margin, po.min_rel_margin, ma.min_rel_margin})) +
                 " (>= -1e-9); auxiliary bound max ratio " + fmt1(worst_aux) + " (<= 1)";
        return ok;
    });

    // 8. Wood anomaly handling
    run_criterion(8, [](std::string& detail) {
        RunConfig cfg;
        cfg.bc = "dirichlet";
        cfg.profile = "flat(0)";
        cfg.R = 1.0;
        cfg.mesh_h = 0.15;
        cfg.refinements = 1;
        cfg.k = {1.0};
        cfg.theta_deg = {0.0};
        std::vector<SolveRecord> rows = run_sweep(cfg);
        bool flagged = rows.size() == 1 && rows[0].wood;
        bool graceful = rows[0].status == "ok";
        bool no_cert = rows[0].stability.status == CertificationStatus::NoCertificateWood;
        detail = std::string("k=1, theta=0 has beta_1 = 0: solve ") +
                 (graceful ? "completed" : "failed gracefully") + ", Wood flag " +
                 (flagged ? "set" : "missing") + ", certificate " +
                 (no_cert ? "refused" : "NOT refused");
        return flagged && no_cert;
    });

    std::printf("ACCEPTANCE: %d criteria failed\n", g_failures);
    return g_failures == 0 ? 0 : 1;
}
