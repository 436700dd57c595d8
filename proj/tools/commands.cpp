#include "commands.hpp"

#include "record.hpp"

#include "rrdps/errors.hpp"
#include "rrdps/finite.hpp"
#include "rrdps/simulator.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>

#include <cmath>
#include <fstream>
#include <functional>
#include <memory>
#include <ostream>
#include <thread>

namespace rrdps::cli {

namespace {

std::vector<int> threshold_candidates(const Config &c) {
    return c.nu_th ? std::vector<int>{*c.nu_th} : default_nu_th_candidates();
}

/// Config file, then --set key=value, then the named flags.
class ConfigOptions {
  public:
    explicit ConfigOptions(CLI::App *app) {
        app->add_option("-c,--config", path_, "Config file (key = value lines)");
        add(app, "-L,--length", "protocol.L", "Pulses per packet");
        add(app, "--mu", "protocol.mu", "Mean photon number per pulse");
        add(app, "--nu-th", "protocol.nu_th", "Photon-number threshold");
        add(app, "--system-loss", "channel.system_loss_db", "System loss in dB");
        add(app, "--loss", "channel.channel_loss_db", "Channel loss in dB");
        add(app, "--dark", "channel.dark_cps", "Dark counts per second per detector");
        add(app, "--window", "channel.window_s", "Detection window in seconds");
        add(app, "--e-sys", "channel.e_sys", "System bit error rate");
        add(app, "--f-ec", "channel.f_ec", "Error-correction inefficiency");
        add(app, "--setup", "channel.setup", "passive or active");
        app->add_option("--set", sets_, "Override any config key, as key=value");
    }

    [[nodiscard]] Config resolve() const {
        Config c = path_.empty() ? Config{} : load_config(path_);
        for (const auto &s : sets_) {
            const auto eq = s.find('=');
            if (eq == std::string::npos)
                throw ConfigError(s, "expected key=value");
            std::string key = s.substr(0, eq);
            while (!key.empty() && key.back() == ' ')
                key.pop_back();
            c.set(key, s.substr(eq + 1));
        }
        for (const auto &f : flags_)
            if (f.option->count() > 0)
                c.set(f.key, *f.value);
        c.validate();
        return c;
    }

  private:
    struct Flag {
        std::string key;
        CLI::Option *option;
        std::unique_ptr<std::string> value;
    };

    void add(CLI::App *app, const std::string &name, std::string key, const std::string &description) {
        auto value = std::make_unique<std::string>();
        auto *option = app->add_option(name, *value, description + " [" + key + "]");
        flags_.push_back({std::move(key), option, std::move(value)});
    }

    std::string path_;
    std::vector<std::string> sets_;
    std::vector<Flag> flags_;
};

/// Runs `body` against --out when given, otherwise against `out`.
void with_output(const std::string &path, std::ostream &out, const std::function<void(std::ostream &)> &body) {
    if (path.empty()) {
        body(out);
        return;
    }
    std::ofstream file(path);
    if (!file)
        throw UsageError("cannot write " + path);
    body(file);
}

KeyRatePoint point_at(ProtocolParams p, const ChannelModel &ch) {
    return {ch.channel_loss_db, p.mu, p.nu_th, model_key_rate(p, ch)};
}

/// mu from the config, or the optimum when the config leaves it out.
ProtocolParams resolved_params(const Config &c) {
    if (c.mu) {
        auto p = c.params();
        if (!c.nu_th) {
            const auto best = evaluate_point(c);
            p.nu_th = best.nu_th;
        }
        return p;
    }
    const auto best = optimize_point(c);
    auto p = c.params();
    p.mu = best.mu;
    p.nu_th = best.nu_th;
    return p;
}

// -------------------------------------------------------------------------

void cmd_keyrate(const Config &c, const std::string &out_path, std::ostream &out) {
    const auto point = evaluate_point(c);
    with_output(out_path, out, [&](std::ostream &os) { os << keyrate_header << '\n' << format_row(point) << '\n'; });
}

void cmd_optimize(const Config &c, const std::string &out_path, std::ostream &out) {
    const auto point = optimize_point(c);
    with_output(out_path, out, [&](std::ostream &os) { os << keyrate_header << '\n' << format_row(point) << '\n'; });
}

void cmd_table_s1(const std::string &out_path, std::ostream &out) {
    with_output(out_path, out, [](std::ostream &os) {
        os << "L,e_sys_max\n";
        for (int L : {5, 16, 32, 64, 128})
            os << L << ',' << csv_number(max_tolerable_esys(L)) << '\n';
    });
}

struct SweepArgs {
    std::string axis;
    double from = 0.0;
    double to = 0.0;
    double step = 0.0;
    int points = 0;
    bool log_spaced = false;
    std::string out;
};

void cmd_sweep(const Config &base, const SweepArgs &a, std::ostream &out) {
    const auto grid = sweep_grid(a.from, a.to, a.step, a.points, a.log_spaced);
    std::vector<std::string> rows;
    for (double v : grid) {
        Config c = base;
        if (a.axis == "loss") {
            c.channel_loss_db = v;
        } else if (a.axis == "mu") {
            c.mu = v;
        } else {
            if (v != std::round(v))
                throw UsageError(fmt::format("L axis needs integer values, got {}", v));
            c.L = static_cast<int>(v);
        }
        c.validate();
        rows.push_back(csv_number(v) + ',' + format_row(evaluate_point(c)));
    }
    with_output(a.out, out, [&](std::ostream &os) {
        os << a.axis << ',' << keyrate_header << '\n';
        for (const auto &r : rows)
            os << r << '\n';
    });
}

struct SimulateArgs {
    std::uint64_t seed = 0;
    std::int64_t packets = 0;
    unsigned workers = 0;
    std::string out;
    std::string csv;
    std::string record;
};

void cmd_simulate(const Config &c, const SimulateArgs &a, std::ostream &out, std::ostream &err) {
    if (a.packets <= 0)
        throw UsageError("--packets must be positive");
    SimConfig sim;
    sim.params = resolved_params(c);
    sim.channel = c.channel();
    sim.n_packets = static_cast<std::uint64_t>(a.packets);
    sim.seed = a.seed;
    sim.workers = a.workers > 0 ? a.workers : std::max(1U, std::thread::hardware_concurrency());
    const auto report = simulate(sim);

    json doc = to_json(report);
    doc["L"] = sim.params.L;
    doc["mu"] = sim.params.mu;
    doc["packets"] = sim.n_packets;
    with_output(a.out, out, [&](std::ostream &os) { os << doc.dump(2) << '\n'; });

    const auto &s = report.stats;
    const double Q = static_cast<double>(s.n_sifted) / static_cast<double>(s.n_emitted);
    const double e_bit = s.n_sifted > 0 ? s.bit_error_rate() : 0.0;
    if (!a.csv.empty()) {
        with_output(a.csv, out, [&](std::ostream &os) {
            os << "n_emitted,n_sifted,n_bit_errors,n_double_clicks,n_discarded,Q,e_bit,q_d\n";
            os << s.n_emitted << ',' << s.n_sifted << ',' << s.n_bit_errors << ',' << s.n_double_clicks << ','
               << report.n_discarded << ',' << csv_number(Q) << ',' << (s.n_sifted > 0 ? csv_number(e_bit) : "")
               << ',' << (s.n_sifted > 0 ? csv_number(double_click_fraction(s)) : "") << '\n';
        });
    }
    if (!a.record.empty()) {
        json inputs{{"seed", a.seed}, {"packets", sim.n_packets}, {"mu", sim.params.mu}};
        const auto path = write_record(a.record, make_record("simulate", c, inputs, doc));
        err << "record: " << path.string() << '\n';
    }
    err << fmt::format("packets {}  sifted {}  Q {:.6g}  e_bit {:.6g}  double clicks {}  discarded {}  {:.2f} s\n",
                       s.n_emitted, s.n_sifted, Q, e_bit, s.n_double_clicks, report.n_discarded, report.elapsed_s);
}

struct FiniteArgs {
    std::string stats_path;
    std::int64_t n_emitted = -1;
    std::int64_t n_sifted = -1;
    std::int64_t bit_errors = -1;
    double e_bit = -1.0;
    std::int64_t double_clicks = 0;
    std::int64_t synthesize = -1;
    double p_d = -1.0;
    double log2_eps1 = 0.0;
    double log2_eps2 = 0.0;
    double log2_eps3 = 0.0;
    double log2_eta_x = 0.0;
    double log2_eta_z = 0.0;
    std::string out;
    std::string record;
};

void cmd_finite(const Config &c, const FiniteArgs &a, const CLI::App &sub, std::ostream &out, std::ostream &err) {
    const bool inline_stats = sub.count("--n-emitted") + sub.count("--n-sifted") + sub.count("--bit-errors") +
                                  sub.count("--e-bit") + sub.count("--double-clicks") >
                              0;
    const int sources = int(!a.stats_path.empty()) + int(inline_stats) + int(sub.count("--synthesize") > 0);
    if (sources != 1)
        throw UsageError("give exactly one of --stats, inline counts, or --synthesize");

    const auto params = resolved_params(c);
    const auto channel = c.channel();

    RunStatistics stats;
    if (!a.stats_path.empty()) {
        std::ifstream in(a.stats_path);
        if (!in)
            throw UsageError("cannot open " + a.stats_path);
        try {
            stats = stats_from_json(json::parse(in));
        } catch (const json::exception &e) {
            throw UsageError(fmt::format("{}: {}", a.stats_path, e.what()));
        }
    } else if (inline_stats) {
        if (a.n_emitted < 0 || a.n_sifted < 0)
            throw UsageError("inline statistics need --n-emitted and --n-sifted");
        if ((a.bit_errors >= 0) == (a.e_bit >= 0.0))
            throw UsageError("give exactly one of --bit-errors and --e-bit");
        if (a.double_clicks < 0)
            throw UsageError("--double-clicks must be non-negative");
        stats.n_emitted = static_cast<std::uint64_t>(a.n_emitted);
        stats.n_sifted = static_cast<std::uint64_t>(a.n_sifted);
        stats.n_bit_errors = a.bit_errors >= 0
                                 ? static_cast<std::uint64_t>(a.bit_errors)
                                 : static_cast<std::uint64_t>(std::llround(a.e_bit * static_cast<double>(a.n_sifted)));
        stats.n_double_clicks = static_cast<std::uint64_t>(a.double_clicks);
    } else {
        if (a.synthesize <= 0)
            throw UsageError("--synthesize must be positive");
        stats = synthesize_statistics(params, channel, static_cast<std::uint64_t>(a.synthesize));
    }
    stats.validate();

    EpsilonBudget budget = EpsilonBudget::defaults();
    auto override_eps = [&sub](const char *flag, double log2_value, LogProb &target) {
        if (sub.count(flag) > 0)
            target = LogProb::from_log2(log2_value);
    };
    override_eps("--log2-eps1", a.log2_eps1, budget.eps1);
    override_eps("--log2-eps2", a.log2_eps2, budget.eps2);
    override_eps("--log2-eps3", a.log2_eps3, budget.eps3);
    override_eps("--log2-eta-x", a.log2_eta_x, budget.eta_x);
    override_eps("--log2-eta-z", a.log2_eta_z, budget.eta_z);

    const double p_d = a.p_d >= 0.0 ? a.p_d : model_double_click(params, channel);
    const auto finite = finite_key_length(stats, params, channel.f_ec, p_d, budget);
    const auto asymptotic = asymptotic_key_length(stats, params, channel.f_ec);

    json doc = to_json(finite);
    doc["L"] = params.L;
    doc["mu"] = params.mu;
    doc["nu_th"] = params.nu_th;
    doc["p_d"] = p_d;
    doc["stats"] = to_json(stats);
    doc["g_asymptotic"] = asymptotic.secure_length;
    doc["fraction"] = asymptotic.secure_length > 0.0 ? json(finite.g_f / asymptotic.secure_length) : json(nullptr);
    with_output(a.out, out, [&](std::ostream &os) { os << doc.dump(2) << '\n'; });

    if (!a.record.empty()) {
        json inputs{{"stats", to_json(stats)}, {"p_d", p_d}, {"mu", params.mu}, {"nu_th", params.nu_th}};
        const auto path = write_record(a.record, make_record("finite", c, inputs, doc));
        err << "record: " << path.string() << '\n';
    }
}

} // namespace

// ---------------------------------------------------------------------------

KeyRatePoint evaluate_point(const Config &c) {
    if (!c.mu)
        return optimize_point(c);
    auto p = c.params();
    const auto ch = c.channel();
    ch.validate();
    KeyRatePoint best;
    bool first = true;
    for (int nu : threshold_candidates(c)) {
        p.nu_th = nu;
        auto candidate = point_at(p, ch);
        if (first || candidate.model.rate_per_pulse > best.model.rate_per_pulse)
            best = candidate;
        first = false;
    }
    return best;
}

KeyRatePoint optimize_point(const Config &c) {
    auto p = c.params();
    const auto ch = c.channel();
    const auto opt = optimize_mu(p, ch, threshold_candidates(c));
    p.mu = opt.mu;
    p.nu_th = opt.nu_th;
    return point_at(p, ch);
}

std::string csv_number(double x) { return fmt::format("{:.6g}", x); }

std::string format_row(const KeyRatePoint &p) {
    const auto &m = p.model;
    const bool has_key = !m.no_key_possible && m.g_over_n > 0.0;
    return fmt::format("{},{},{},{},{},{},{},{},{},{}", csv_number(p.channel_loss_db), csv_number(p.mu), p.nu_th,
                       csv_number(m.Q), m.Q > 0.0 ? csv_number(m.e_bit) : "", csv_number(m.p_d),
                       csv_number(m.e_src), m.e_ph_prime ? csv_number(*m.e_ph_prime) : "",
                       csv_number(has_key ? m.g_over_n : 0.0), csv_number(has_key ? m.rate_per_pulse : 0.0));
}

std::vector<double> sweep_grid(double from, double to, double step, int points, bool log_spaced) {
    if (!std::isfinite(from) || !std::isfinite(to) || to < from)
        throw UsageError("empty sweep range");
    std::vector<double> grid;
    if (points > 0) {
        if (log_spaced && from <= 0.0)
            throw UsageError("log spacing needs a positive start");
        for (int i = 0; i < points; ++i) {
            const double t = points == 1 ? 0.0 : static_cast<double>(i) / (points - 1);
            grid.push_back(log_spaced ? std::pow(10.0, std::log10(from) + t * (std::log10(to) - std::log10(from)))
                                      : from + t * (to - from));
        }
        return grid;
    }
    if (log_spaced)
        throw UsageError("log spacing needs --points");
    if (!(step > 0.0))
        throw UsageError("empty sweep range: step must be positive");
    const auto n = static_cast<long>(std::floor((to - from) / step + 1e-9)) + 1;
    for (long i = 0; i < n; ++i)
        grid.push_back(from + static_cast<double>(i) * step);
    return grid;
}

int run(int argc, const char *const *argv, std::ostream &out, std::ostream &err) {
    CLI::App app{"RRDPS key-rate calculator and Monte Carlo simulator", "rrdps"};
    app.require_subcommand(1);

    std::string out_path;

    auto *keyrate = app.add_subcommand("keyrate", "Modelled key rate at one operating point (CSV)");
    ConfigOptions keyrate_cfg(keyrate);
    keyrate->add_option("-o,--out", out_path, "Write CSV here instead of stdout");

    auto *optimize = app.add_subcommand("optimize", "Key rate at the optimal mu and threshold (CSV)");
    ConfigOptions optimize_cfg(optimize);
    optimize->add_option("-o,--out", out_path, "Write CSV here instead of stdout");

    auto *table = app.add_subcommand("table-s1", "Maximum tolerable system error per packet length (CSV)");
    table->add_option("-o,--out", out_path, "Write CSV here instead of stdout");

    SweepArgs sweep_args;
    auto *sweep = app.add_subcommand("sweep", "Key-rate table over loss, mu or L (CSV)");
    ConfigOptions sweep_cfg(sweep);
    sweep->add_option("--axis", sweep_args.axis, "loss, mu or L")
        ->required()
        ->check(CLI::IsMember({"loss", "mu", "L"}));
    sweep->add_option("--from", sweep_args.from, "First grid value")->required();
    sweep->add_option("--to", sweep_args.to, "Last grid value")->required();
    sweep->add_option("--step", sweep_args.step, "Grid spacing");
    sweep->add_option("--points", sweep_args.points, "Number of grid values (instead of --step)");
    sweep->add_flag("--log", sweep_args.log_spaced, "Space --points values logarithmically");
    sweep->add_option("-o,--out", sweep_args.out, "Write CSV here instead of stdout");

    SimulateArgs sim_args;
    auto *sim = app.add_subcommand("simulate", "Packet-level Monte Carlo run (JSON)");
    ConfigOptions sim_cfg(sim);
    sim->add_option("--seed", sim_args.seed, "Random seed");
    sim->add_option("-n,--packets", sim_args.packets, "Packets to simulate")->required();
    sim->add_option("-j,--workers", sim_args.workers, "Worker threads (default: all cores)");
    sim->add_option("-o,--out", sim_args.out, "Write JSON here instead of stdout");
    sim->add_option("--csv", sim_args.csv, "Also write summary statistics as CSV");
    sim->add_option("--record", sim_args.record, "Directory for the run record");

    FiniteArgs fin_args;
    auto *fin = app.add_subcommand("finite", "Finite-key length and security bound (JSON)");
    ConfigOptions fin_cfg(fin);
    fin->add_option("--stats", fin_args.stats_path, "JSON file with n_emitted, n_sifted, n_bit_errors, n_double_clicks");
    fin->add_option("--n-emitted", fin_args.n_emitted, "Packets sent");
    fin->add_option("--n-sifted", fin_args.n_sifted, "Sifted key length");
    fin->add_option("--bit-errors", fin_args.bit_errors, "Bit errors in the sifted key");
    fin->add_option("--e-bit", fin_args.e_bit, "Bit error rate (instead of --bit-errors)");
    fin->add_option("--double-clicks", fin_args.double_clicks, "Double-click count");
    fin->add_option("--synthesize", fin_args.synthesize, "Use modelled statistics for this sifted length");
    fin->add_option("--pd", fin_args.p_d, "Double-click probability per packet (default: channel model)");
    fin->add_option("--log2-eps1", fin_args.log2_eps1, "log2 of the double-click test failure probability");
    fin->add_option("--log2-eps2", fin_args.log2_eps2, "log2 of the source tail failure probability");
    fin->add_option("--log2-eps3", fin_args.log2_eps3, "log2 of the phase-error sampling failure probability");
    fin->add_option("--log2-eta-x", fin_args.log2_eta_x, "log2 of the phase-error correction failure probability");
    fin->add_option("--log2-eta-z", fin_args.log2_eta_z, "log2 of the verification failure probability");
    fin->add_option("-o,--out", fin_args.out, "Write JSON here instead of stdout");
    fin->add_option("--record", fin_args.record, "Directory for the run record");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError &e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? exit_ok : exit_usage;
    }

    try {
        if (keyrate->parsed())
            cmd_keyrate(keyrate_cfg.resolve(), out_path, out);
        else if (optimize->parsed())
            cmd_optimize(optimize_cfg.resolve(), out_path, out);
        else if (table->parsed())
            cmd_table_s1(out_path, out);
        else if (sweep->parsed())
            cmd_sweep(sweep_cfg.resolve(), sweep_args, out);
        else if (sim->parsed())
            cmd_simulate(sim_cfg.resolve(), sim_args, out, err);
        else if (fin->parsed())
            cmd_finite(fin_cfg.resolve(), fin_args, *fin, out, err);
    } catch (const ConfigError &e) {
        err << "config error: " << e.what() << '\n';
        return exit_usage;
    } catch (const SessionDiscarded &e) {
        err << "session discarded: " << e.what() << '\n';
        return exit_discarded;
    } catch (const UsageError &e) {
        err << "error: " << e.what() << '\n';
        return exit_usage;
    } catch (const PreconditionError &e) {
        err << "error: " << e.what() << '\n';
        return exit_usage;
    } catch (const DomainError &e) {
        err << "error: " << e.what() << '\n';
        return exit_usage;
    } catch (const std::exception &e) {
        err << "error: " << e.what() << '\n';
        return 1;
    }
    return exit_ok;
}

} // namespace rrdps::cli
