#include "commands.hpp"

#include <fstream>
#include <memory>
#include <optional>

#include "nhsta/errors.hpp"
#include "nhsta/optomech.hpp"
#include "nhsta/parallel.hpp"
#include "nhsta/robustness.hpp"
#include "nhsta/sta.hpp"
#include "output.hpp"
#include "plot.hpp"

namespace nhsta::cli {

namespace fs = std::filesystem;

fs::path Context::file(const std::string& name) {
    outputs.push_back(name);
    return out / name;
}

IntegratorOptions Context::integrator() const {
    IntegratorOptions o;
    o.rtol = cfg.tol;
    o.atol = 1e-2 * cfg.tol;
    return o;
}

namespace {

const char* mode_tag(int m) { return m == 0 ? "minus" : "plus"; }

json mask_json(const Mask& m) { return {{"A", m.A}, {"nu", m.nu}, {"n", m.n}}; }

struct Built {
    std::shared_ptr<const AdiabaticPath> path;
    Protocol protocol;
    std::optional<DressingAngle> dressing;
    json info = json::object();
};

// Dressing angle for satd / radd with a fixed mask; radd without a mask is optimized.
Built build(const Context& c, const CircularLoop& loop, const Schedule& s, ProtocolKind kind) {
    Built b;
    if (kind == ProtocolKind::RADD && !c.cfg.mask_at(s.t0)) {
        RaddResult r = radd_optimize(loop, s, c.cfg.radd_ranges, c.cfg.grid_size, c.jobs);
        b.path = r.dressing.model->path_ptr();
        b.protocol = std::move(r.protocol);
        b.info["mask"] = mask_json(r.mask);
        b.info["candidates"] = r.candidates;
        b.info["valid_candidates"] = r.valid_candidates;
        b.info["n_crossings"] = r.dressing.n_crossings;
        b.dressing = std::move(r.dressing);
        return b;
    }
    b.path = std::make_shared<const AdiabaticPath>(loop, s, c.cfg.grid_size);
    b.info["sqrt_crossings"] = b.path->sheet().count();
    switch (kind) {
        case ProtocolKind::Uncorrected: b.protocol = uncorrected_protocol(b.path); break;
        case ProtocolKind::TD: b.protocol = td_correction(b.path); break;
        case ProtocolKind::SATD:
        case ProtocolKind::RADD: {
            const Mask m = kind == ProtocolKind::SATD ? Mask{} : *c.cfg.mask_at(s.t0);
            b.dressing = dressing_angle(b.path, m);
            b.info["n_crossings"] = b.dressing->n_crossings;
            b.info["mu_end_over_pi"] = b.dressing->mu_end_over_pi();
            if (kind == ProtocolKind::RADD) b.info["mask"] = mask_json(m);
            b.protocol = satd_fields(*b.dressing);
            break;
        }
        default: throw ConfigError("protocol: unsupported kind");
    }
    return b;
}

std::vector<std::string> phi_columns() {
    std::vector<std::string> h;
    for (const char* e : {"00", "01", "10", "11"})
        for (const char* p : {"re", "im"}) h.push_back(std::string("phi_") + e + "_" + p);
    return h;
}

struct CellResult {
    bool ok = false;
    std::string status;
    json info;
};

void write_protocol_csv(const fs::path& file, const Protocol& p) {
    CsvWriter w(file, {"t", "fx_re", "fx_im", "fy_re", "fy_im", "fz_re", "fz_im", "wx_re", "wx_im", "wy_re", "wy_im",
                       "wz_re", "wz_im"});
    for (std::size_t k = 0; k < p.size(); ++k) {
        const PauliFields& f = p.fields[k];
        const PauliFields w0 = p.correction.empty() ? PauliFields{} : p.correction[k];
        w << p.times[k] << f.x << f.y << f.z << w0.x << w0.y << w0.z;
        w.end_row();
    }
}

void write_dressing_csv(const fs::path& file, const DressingAngle& d) {
    CsvWriter w(file, {"t", "mu_re", "mu_im", "mu_nat_re", "mu_nat_im", "z_re", "z_im"});
    for (std::size_t k = 0; k < d.times.size(); ++k) {
        w << d.times[k] << d.mu[k] << d.mu_nat[k] << d.z[k];
        w.end_row();
    }
}

std::vector<std::pair<double, double>> grid2(const RunConfig& cfg) {
    std::vector<std::pair<double, double>> cells;
    for (double r : cfg.delta0_values())
        for (double t0 : cfg.t0_values()) cells.emplace_back(t0, r);
    return cells;
}

}  // namespace

void cmd_spectrum(Context& c) {
    const AdiabaticPath path(c.cfg.loop, c.cfg.schedule, c.cfg.grid_size);
    const auto times = uniform_grid(c.cfg.schedule.t0, c.cfg.output_points);
    CsvWriter w(c.file("spectrum.csv"), {"t", "eps", "delta", "omega", "gamma", "lambda_plus_re", "lambda_plus_im",
                                         "lambda_minus_re", "lambda_minus_im", "theta_re", "theta_im", "chi"});
    for (double t : times) {
        const AdiabaticSample a = path.at(t);
        w << t << schedule_eps(c.cfg.schedule, t) << a.kin.p.delta << a.kin.p.omega << a.kin.p.gamma << a.lambda << -a.lambda << a.theta
          << a.chi;
        w.end_row();
    }
    const auto a0 = path.at(0.0), a1 = path.at(c.cfg.schedule.t0);
    c.summary["sqrt_crossings"] = path.sheet().count();
    c.summary["endpoint_law_error"] = std::abs(a1.lambda + a0.lambda);
    c.summary["lambda_plus_0"] = {a0.lambda.real(), a0.lambda.imag()};
    c.summary["lambda_plus_t0"] = {a1.lambda.real(), a1.lambda.imag()};
}

void cmd_contour(Context& c) {
    const AdiabaticPath path(c.cfg.loop, c.cfg.schedule, c.cfg.grid_size);
    const auto times = uniform_grid(c.cfg.schedule.t0, c.cfg.output_points);
    {
        CsvWriter w(c.file("contour.csv"), {"t", "eps", "delta", "omega", "gamma", "radicand_re", "radicand_im", "chi"});
        for (double t : times) {
            const AdiabaticSample a = path.at(t);
            w << t << schedule_eps(c.cfg.schedule, t) << a.kin.p.delta << a.kin.p.omega << a.kin.p.gamma << a.r << a.chi;
            w.end_row();
        }
    }
    CsvWriter w(c.file("crossings.csv"), {"index", "t", "eps"});
    const auto& cr = path.sheet().crossings;
    for (std::size_t i = 0; i < cr.size(); ++i) {
        w << i << cr[i] << schedule_eps(c.cfg.schedule, cr[i]);
        w.end_row();
    }
    c.summary["sqrt_crossings"] = cr.size();
    c.summary["grid_points"] = path.grid().size();
    c.summary["encircles_ep"] = ep_encircle_check(uncorrected_protocol(c.cfg.loop, c.cfg.schedule, c.cfg.grid_size));
}

void cmd_simulate(Context& c) {
    const RunConfig& cfg = c.cfg;
    if (!cfg.sweep_t0.empty()) {
        // endpoint quantities against loop time
        const auto t0s = cfg.sweep_t0.values;
        std::vector<std::array<double, 6>> rows(t0s.size());
        std::vector<std::string> status(t0s.size(), "ok");
        parallel_for(t0s.size(), c.jobs, [&](std::size_t i) {
            const Schedule s{t0s[i], cfg.loop.d};
            try {
                const Built b = build(c, cfg.loop, s, cfg.protocol);
                const Flow f = integrate_flow(b.protocol.generator(), std::vector<double>{0.0, s.t0}, c.integrator());
                const std::vector<ComplexMatrix2> fr{b.path->frame(0.0), b.path->frame(s.t0)};
                rows[i] = {transition_prob(f, fr, 1, Mode::Minus, Mode::Minus),
                           transition_prob(f, fr, 1, Mode::Minus, Mode::Plus),
                           transition_prob(f, fr, 1, Mode::Plus, Mode::Minus),
                           transition_prob(f, fr, 1, Mode::Plus, Mode::Plus),
                           unitarity_defect(f.true_flow(1)), f.log_scale.back()};
            } catch (const InvalidStaError&) {
                rows[i].fill(NAN);
                status[i] = "invalid";
            }
        });
        CsvWriter w(c.file("simulate_sweep.csv"), {"t0", "P_minus_minus", "P_minus_plus", "P_plus_minus", "P_plus_plus",
                                                   "unitarity_defect", "log_scale", "status"});
        std::size_t best = 0;
        for (std::size_t i = 0; i < t0s.size(); ++i) {
            w << t0s[i];
            for (double v : rows[i]) w << v;
            w << status[i];
            w.end_row();
            if (rows[i][4] < rows[best][4]) best = i;
        }
        c.summary["min_unitarity_defect"] = {{"t0", t0s[best]}, {"defect", rows[best][4]}};
        return;
    }
    const Built b = build(c, cfg.loop, cfg.schedule, cfg.protocol);
    const auto times = uniform_grid(cfg.schedule.t0, cfg.output_points);
    const Flow f = integrate_flow(b.protocol.generator(), times, c.integrator());
    const auto frames = frames_on(*b.path, f.times);
    const ProbabilityTrace tr = transition_probabilities(f, frames);
    std::vector<std::string> head{"t", "P_minus_minus", "P_minus_plus", "P_plus_minus", "P_plus_plus", "log_scale"};
    for (const auto& h : phi_columns()) head.push_back(h);
    CsvWriter w(c.file("probability.csv"), head);
    for (std::size_t k = 0; k < f.times.size(); ++k) {
        w << f.times[k] << tr.p[k][0][0] << tr.p[k][0][1] << tr.p[k][1][0] << tr.p[k][1][1] << f.log_scale[k];
        for (int r = 0; r < 2; ++r)
            for (int s = 0; s < 2; ++s) w << f.phi[k](r, s);
        w.end_row();
    }
    json& s = c.summary;
    s["protocol"] = to_string(cfg.protocol);
    s["protocol_info"] = b.info;
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j)
            s["P_end"][std::string(mode_tag(i)) + "_" + mode_tag(j)] = tr.p.back()[i][j];
    s["fidelity_error"] = {{"minus", 1.0 - tr.p.back()[0][0]}, {"plus", 1.0 - tr.p.back()[1][1]}};
    s["max_deviation"] = {{"minus", tr.max_deviation(Mode::Minus)}, {"plus", tr.max_deviation(Mode::Plus)}};
    s["unitarity_defect"] = unitarity_defect(f.true_flow(f.times.size() - 1));
    s["integrator_steps"] = {{"accepted", f.accepted_steps}, {"rejected", f.rejected_steps}};
    try {
        const PermutationOp op = extract_permutation(f.true_flow(f.times.size() - 1), b.path->frame(0.0));
        s["permutation"] = {{"sigma", op.sigma}, {"dominance", op.dominance}};
    } catch (const NoClearPermutationError& e) {
        s["permutation"] = {{"error", e.what()}};
    }
}

void cmd_correct(Context& c, ProtocolKind kind) {
    const RunConfig& cfg = c.cfg;
    if (kind == ProtocolKind::SATD || (kind == ProtocolKind::RADD && cfg.mask)) {
        // write the dressing angle first so an invalid STA still leaves its mu(t) behind
        auto path = std::make_shared<const AdiabaticPath>(cfg.loop, cfg.schedule, cfg.grid_size);
        const Mask m = kind == ProtocolKind::SATD ? Mask{} : *cfg.mask_at(cfg.schedule.t0);
        const DressingAngle d = dressing_angle(path, m);
        write_dressing_csv(c.file("dressing.csv"), d);
        c.summary["n_crossings"] = d.n_crossings;
        c.summary["mu_end_over_pi"] = d.mu_end_over_pi();
        c.summary["valid"] = d.valid;
    }
    const Built b = build(c, cfg.loop, cfg.schedule, kind);
    if (b.dressing && !fs::exists(c.out / "dressing.csv")) write_dressing_csv(c.file("dressing.csv"), *b.dressing);
    write_protocol_csv(c.file("protocol.csv"), b.protocol);
    c.summary["protocol"] = to_string(kind);
    c.summary["protocol_info"] = b.info;
    c.summary["rms"] = rms(b.protocol);
    c.summary["correction_rms"] = correction_rms(b.protocol);
    const auto mag = [](const PauliFields& f) { return std::sqrt(f.norm_sq()); };
    if (!b.protocol.correction.empty())
        c.summary["endpoint_correction"] = {mag(b.protocol.correction.front()), mag(b.protocol.correction.back())};
}

void cmd_validity_map(Context& c) {
    const RunConfig& cfg = c.cfg;
    const auto cells = grid2(cfg);
    const ProtocolKind kind = cfg.protocol == ProtocolKind::RADD && cfg.mask ? ProtocolKind::RADD : ProtocolKind::SATD;
    struct Row {
        int n = 0;
        double mu = NAN;
        std::string label;
    };
    std::vector<Row> rows(cells.size());
    parallel_for(cells.size(), c.jobs, [&](std::size_t i) {
        CircularLoop loop = cfg.loop;
        loop.delta0 = cells[i].second;
        const Schedule s{cells[i].first, loop.d};
        try {
            auto path = std::make_shared<const AdiabaticPath>(loop, s, cfg.grid_size);
            const DressingAngle d = dressing_angle(path, kind == ProtocolKind::RADD ? *cfg.mask_at(s.t0) : Mask{});
            rows[i] = {d.n_crossings, d.mu_end_over_pi(), d.valid ? "valid" : "invalid"};
        } catch (const NumericError& e) {
            rows[i] = {0, NAN, "numeric-error"};
        }
    });
    CsvWriter w(c.file("validity.csv"), {"t0", "delta0", "n_crossings", "mu_end_over_pi", "valid", "label"});
    int nvalid = 0;
    for (std::size_t i = 0; i < cells.size(); ++i) {
        w << cells[i].first << cells[i].second << rows[i].n << rows[i].mu << int(rows[i].label == "valid")
          << rows[i].label;
        w.end_row();
        nvalid += rows[i].label == "valid";
    }
    c.summary["protocol"] = to_string(kind);
    c.summary["cells"] = cells.size();
    c.summary["valid_cells"] = nvalid;
}

void cmd_robustness(Context& c) {
    const RunConfig& cfg = c.cfg;
    const NoiseConfig noise = cfg.noise.value_or(NoiseConfig{});
    std::vector<ProtocolKind> kinds = cfg.kinds;
    if (kinds.empty()) kinds = {ProtocolKind::TD, ProtocolKind::SATD};
    const auto t0s = cfg.t0_values();
    struct Cell {
        double t0;
        ProtocolKind kind;
        double e_mm = NAN, e_pp = NAN;
        std::string status = "ok";
    };
    std::vector<Cell> cells;
    for (ProtocolKind k : kinds)
        for (double t0 : t0s) cells.push_back({t0, k});
    // cells run one after another; each spreads its quadrature nodes over the workers
    for (Cell& cell : cells) {
        try {
            const Built b = build(c, cfg.loop, Schedule{cell.t0, cfg.loop.d}, cell.kind);
            auto err = [&](Mode m) {
                if (noise.adaptive)
                    return noise_averaged_error_adaptive(b.protocol, *b.path, m, m, noise.model.beta, noise.rel_tol,
                                                         c.integrator(), c.jobs)
                        .error;
                return noise_averaged_error(b.protocol, *b.path, m, m, noise.model, c.integrator(), c.jobs);
            };
            cell.e_mm = err(Mode::Minus);
            cell.e_pp = err(Mode::Plus);
        } catch (const InvalidStaError&) {
            cell.status = "invalid";
        }
    }
    CsvWriter w(c.file("robustness.csv"), {"t0", "protocol", "i", "j", "beta", "error", "status"});
    for (const Cell& cell : cells)
        for (int m = 0; m < 2; ++m) {
            w << cell.t0 << to_string(cell.kind) << mode_tag(m) << mode_tag(m) << noise.model.beta
              << (m == 0 ? cell.e_mm : cell.e_pp) << cell.status;
            w.end_row();
        }
    c.summary["beta"] = noise.model.beta;
    c.summary["method"] = noise.adaptive ? "adaptive" : "gauss-hermite";
    if (noise.adaptive)
        c.summary["rel_tol"] = noise.rel_tol;
    else
        c.summary["quadrature_order"] = noise.model.quadrature_order;
    if (noise.mc_samples > 0) {
        // spot check of the quadrature on the first valid cell
        for (const Cell& cell : cells) {
            if (cell.status != "ok") continue;
            const Built b = build(c, cfg.loop, Schedule{cell.t0, cfg.loop.d}, cell.kind);
            const MonteCarloEstimate mc = noise_averaged_error_mc(b.protocol, *b.path, Mode::Minus, Mode::Minus,
                                                                  noise.model.beta, noise.mc_samples, c.seed,
                                                                  c.integrator(), c.jobs);
            c.summary["monte_carlo"] = {{"t0", cell.t0},          {"protocol", to_string(cell.kind)},
                                        {"samples", mc.samples},  {"mean_error", mc.mean_error},
                                        {"std_error", mc.std_error}, {"quadrature", cell.e_mm},
                                        {"seed", c.seed}};
            break;
        }
    }
}

void cmd_optimize_radd(Context& c) {
    const RunConfig& cfg = c.cfg;
    const auto t0s = cfg.t0_values();
    CsvWriter w(c.file("radd.csv"), {"t0", "A", "nu", "n", "candidates", "valid_candidates", "rms_td", "rms_satd",
                                     "rms_radd", "full_rms_uncorrected", "full_rms_td", "full_rms_satd",
                                     "full_rms_radd"});
    json points = json::array();
    for (double t0 : t0s) {
        const Schedule s{t0, cfg.loop.d};
        const RaddResult r = radd_optimize(cfg.loop, s, cfg.radd_ranges, cfg.grid_size, c.jobs);
        auto path = r.dressing.model->path_ptr();
        const Protocol uc = uncorrected_protocol(path);
        const Protocol td = td_correction(path);
        double satd_c = NAN, satd_f = NAN;
        const DressingAngle d = dressing_angle(path, Mask{});
        if (d.valid) {
            const Protocol sp = satd_fields(d);
            satd_c = correction_rms(sp);
            satd_f = rms(sp);
        }
        w << t0 << r.mask.A << r.mask.nu << r.mask.n << r.candidates << r.valid_candidates << correction_rms(td)
          << satd_c << r.rms << rms(uc) << rms(td) << satd_f << rms(r.protocol);
        w.end_row();
        points.push_back({{"t0", t0}, {"mask", mask_json(r.mask)}, {"rms_radd", r.rms}, {"rms_satd", satd_c}});
        if (t0s.size() == 1) write_protocol_csv(c.file("radd_protocol.csv"), r.protocol);
    }
    c.summary["points"] = points;
    c.summary["objective"] = "correction-field RMS";
}

void cmd_encircle_check(Context& c) {
    const RunConfig& cfg = c.cfg;
    const ProtocolKind kind = cfg.protocol == ProtocolKind::Uncorrected ? ProtocolKind::TD : cfg.protocol;
    const auto cells = grid2(cfg);
    struct Row {
        int valid = 0, winding = 0, enc = 0, swap = 0, perm_swap = -1;
        std::string label;
    };
    std::vector<Row> rows(cells.size());
    parallel_for(cells.size(), c.jobs, [&](std::size_t i) {
        CircularLoop loop = cfg.loop;
        loop.delta0 = cells[i].second;
        const Schedule s{cells[i].first, loop.d};
        Row& r = rows[i];
        try {
            Context local{cfg, c.out, 1, c.seed, {}, {}};
            const Built b = build(local, loop, s, kind);
            r.valid = 1;
            const Winding wd = discriminant_winding(b.protocol, b.protocol.times);
            r.winding = wd.winding;
            r.enc = wd.encircles;
            r.swap = braid_criteria(braid_trace(concatenate(b.protocol, b.protocol)), s.t0).swap();
            try {
                const Flow f = integrate_flow(b.protocol.generator(), std::vector<double>{0.0, s.t0}, c.integrator());
                r.perm_swap = extract_permutation(f.true_flow(1), b.path->frame(0.0)).is_swap();
            } catch (const NoClearPermutationError&) {
                r.perm_swap = -1;
            }
            r.label = r.enc ? "encircled" : "not-encircled";
        } catch (const InvalidStaError&) {
            r.label = "NV";
        } catch (const NumericError&) {
            r.label = "numeric-error";
        }
    });
    CsvWriter w(c.file("encircle.csv"),
                {"t0", "delta0", "valid", "winding", "encircles", "spectral_swap", "flow_swap", "label"});
    int enc = 0, nv = 0;
    for (std::size_t i = 0; i < cells.size(); ++i) {
        const Row& r = rows[i];
        w << cells[i].first << cells[i].second << r.valid << r.winding << r.enc << r.swap << r.perm_swap << r.label;
        w.end_row();
        enc += r.enc;
        nv += r.label == "NV";
    }
    c.summary["protocol"] = to_string(kind);
    c.summary["cells"] = cells.size();
    c.summary["encircled"] = enc;
    c.summary["not_valid"] = nv;
}

void cmd_map_optomech(Context& c) {
    const RunConfig& cfg = c.cfg;
    if (!cfg.optomech) throw ConfigError("config: optomech: missing required section for map-optomech");
    const OptomechConfig& o = *cfg.optomech;
    Protocol target;
    if (!o.times.empty()) {
        target = optomech_protocol(o.times, o.P_L, o.delta0, o.params);
        c.summary["target"] = "schedule";
    } else {
        target = build(c, cfg.loop, cfg.schedule, cfg.protocol).protocol;
        for (auto& f : target.fields) f = PauliFields{o.field_scale * f.x, o.field_scale * f.y, o.field_scale * f.z};
        c.summary["target"] = to_string(cfg.protocol);
    }
    InversionOptions opt;
    opt.branch = o.branch;
    opt.strict = false;
    const ControlSchedule s = invert_controls(target, o.params, opt);
    CsvWriter w(c.file("optomech.csv"), {"t", "P_L", "delta0", "residual", "feasible"});
    std::size_t nf = 0;
    json first_bad = nullptr;
    for (std::size_t k = 0; k < s.times.size(); ++k) {
        w << s.times[k] << s.P_L[k] << s.delta0[k] << s.residual[k] << int(s.feasible[k]);
        w.end_row();
        nf += s.feasible[k];
        if (!s.feasible[k] && first_bad.is_null()) first_bad = {{"t", s.times[k]}, {"residual", s.residual[k]}};
    }
    c.summary["samples"] = s.times.size();
    c.summary["feasible_samples"] = nf;
    c.summary["first_infeasible"] = first_bad;
    if (!o.times.empty()) {
        double worst = 0.0;
        for (std::size_t k = 0; k < s.times.size(); ++k) {
            if (o.P_L[k] > 0.0) worst = std::max(worst, std::abs(s.P_L[k] - o.P_L[k]) / o.P_L[k]);
            worst = std::max(worst, std::abs(s.delta0[k] - o.delta0[k]) / std::max(1e-300, std::abs(o.delta0[k])));
        }
        c.summary["round_trip_error"] = worst;
    }
}

void cmd_emit_plot(Context& c, const fs::path& input, const std::string& kind_name, const std::string& title) {
    const PlotKind kind = plot_kind_from_string(kind_name);
    const CsvTable t = read_csv(input);
    const std::string svg = render_svg(t, kind, title.empty() ? input.stem().string() : title);
    const std::string name = input.stem().string() + "_" + to_string(kind) + ".svg";
    std::ofstream out(c.file(name), std::ios::binary);
    if (!out) throw ConfigError("cannot write " + (c.out / name).string());
    out << svg;
    c.summary["input"] = input.filename().string();
    c.summary["kind"] = to_string(kind);
    c.summary["rows"] = t.rows.size();
}

}  // namespace nhsta::cli
