// minfer: command-line front end for minimal inference on incomplete 2x2 tables.
//
//   minfer analyze  --setting missing --counts 32,54,24
//   minfer curve    --setting missing --counts 32,54,24 --method normal --grid 0:1:0.001
//   minfer levelset --setting missing --counts 32,54,24 --alpha 0.5 --h 0,0.01
//   minfer assure   --setting missing --counts 32,54,24 --h 0,0.01,0.06,0.4,0.8
//   minfer test     --setting missing --counts 32,54,24 --theta-star 0.2,0.6
//   minfer simulate --setting matched --psi 0.3,0.3 --sizes 200,300 --reps 5000
//
// Exit codes: 0 success, 1 validation or usage error, 2 numeric failure.

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "minfer/io.hpp"
#include "minfer/minfer.hpp"

namespace {

using namespace minfer;
using nlohmann::json;

struct RunConfig {
    std::string setting;
    std::string counts;
    std::string psi;
    std::string sizes;
    std::string grid = "0:1:0.001";
    std::string method;
    Count B = 5000;
    Count reps = 5000;
    Count B_outer = 5000;
    std::string inner_method;
    Count inner_B = 1000;
    std::uint64_t seed = 1;
    std::string h_list;
    std::string alpha_list;
    std::optional<double> tau_min;
    std::string theta_star;
    double power_threshold = 0.5;
    std::string delta_rule = "closed";
    unsigned threads = 0;
    std::string out;
    std::string csv;
};

template <class T>
std::vector<T> parse_list(const std::string& text, const char* what)
{
    std::vector<T> values;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        const auto b = item.find_first_not_of(" \t");
        const auto e = item.find_last_not_of(" \t");
        if (b == std::string::npos)
            throw Error(Errc::invalid_argument, std::string("empty entry in ") + what);
        item = item.substr(b, e - b + 1);
        try {
            std::size_t used = 0;
            T v{};
            if constexpr (std::is_integral_v<T>)
                v = static_cast<T>(std::stoll(item, &used));
            else
                v = std::stod(item, &used);
            if (used != item.size())
                throw std::invalid_argument(item);
            values.push_back(v);
        } catch (const std::exception&) {
            throw Error(Errc::invalid_argument, std::string("cannot parse '") + item + "' in " + what);
        }
    }
    if (values.empty())
        throw Error(Errc::invalid_argument, std::string(what) + " is empty");
    return values;
}

Setting parse_setting(const std::string& s)
{
    if (s == "missing")
        return Setting::missing;
    if (s == "matched")
        return Setting::matched;
    throw Error(Errc::invalid_argument, "--setting must be 'missing' or 'matched'");
}

ObservedTable load_table(const RunConfig& cfg)
{
    if (cfg.counts.empty())
        throw Error(Errc::invalid_argument, "--counts is required");
    const auto raw = parse_list<Count>(cfg.counts, "--counts");
    return validate(raw, parse_setting(cfg.setting));
}

std::pair<Psi, SampleSizes> load_psi(const RunConfig& cfg)
{
    if (cfg.psi.empty() || cfg.sizes.empty())
        throw Error(Errc::invalid_argument, "--psi and --sizes are required");
    const auto p = parse_list<double>(cfg.psi, "--psi");
    const auto s = parse_list<Count>(cfg.sizes, "--sizes");
    if (parse_setting(cfg.setting) == Setting::missing) {
        if (p.size() != 3 || s.size() != 1)
            throw Error(Errc::invalid_argument, "missing setting expects --psi l11,l01,l+0 and --sizes n");
        MissingPsi psi{p[0], p[1], p[2]};
        MissingSizes sizes{s[0]};
        check_psi(psi);
        check_sizes(sizes);
        return {psi, sizes};
    }
    if (p.size() != 2 || s.size() != 2)
        throw Error(Errc::invalid_argument, "matched setting expects --psi l1+,l+1 and --sizes n1,n2");
    MatchedPsi psi{p[0], p[1]};
    MatchedSizes sizes{s[0], s[1]};
    check_psi(psi);
    check_sizes(sizes);
    return {psi, sizes};
}

CurveMethod parse_method(const std::string& s, Setting setting)
{
    if (s.empty())
        return setting == Setting::missing ? CurveMethod::normal : CurveMethod::bootstrap;
    if (s == "normal")
        return CurveMethod::normal;
    if (s == "bootstrap")
        return CurveMethod::bootstrap;
    throw Error(Errc::invalid_argument, "method must be 'normal' or 'bootstrap'");
}

CurveOptions curve_options(const RunConfig& cfg, Setting setting)
{
    if (cfg.B < 1)
        throw Error(Errc::invalid_argument, "--B must be >= 1");
    return {parse_method(cfg.method, setting), cfg.B, cfg.seed, cfg.threads};
}

std::vector<double> load_grid(const RunConfig& cfg)
{
    return make_grid(parse_grid(cfg.grid));
}

std::vector<double> parse_h_list(const std::string& text)
{
    auto hs = parse_list<double>(text, "--h");
    for (double h : hs)
        if (!(h >= 0.0 && h < 1.0))
            throw Error(Errc::invalid_argument, "every h must lie in [0, 1)");
    return hs;
}

void emit(const std::string& path, const std::string& content)
{
    if (path.empty() || path == "-") {
        std::cout << content;
        std::cout.flush();
        return;
    }
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f)
        throw Error(Errc::invalid_argument, "cannot open output file '" + path + "'");
    f << content;
}

std::string dump(const json& j)
{
    return j.dump(2) + "\n";
}

// ---------------------------------------------------------------------------

void cmd_analyze(const RunConfig& cfg)
{
    const auto data = load_table(cfg);
    json j;
    j["setting"] = setting_name(setting_of(data));
    j["counts"] = to_json(data);
    j["psi_hat"] = to_json(mle_psi(data));
    j["ml_region"] = to_json(ml_region(data));
    const auto exact = ml_region_exact(data);
    j["ml_region_exact"] = {{"lower", to_string(exact.lower)}, {"upper", to_string(exact.upper)}};
    if (const auto* t = std::get_if<MissingTable>(&data)) {
        json lik;
        lik["profile_max_log_lik"] = json6(log_lik(*t, mle_psi(*t)));
        if (t->n11 + t->n01 > 0) {
            const double arg = mcar_argmax(*t);
            lik["mcar_argmax"] = json6(arg);
            lik["mcar_max_log_lik"] = json6(mcar_log_lik(*t, arg));
        } else {
            lik["mcar_argmax"] = nullptr;
            lik["mcar_max_log_lik"] = nullptr;
        }
        j["likelihood"] = lik;
    } else {
        j["likelihood"] = nullptr;
    }
    emit(cfg.out, dump(j));
}

void cmd_curve(const RunConfig& cfg)
{
    const bool by_data = !cfg.counts.empty();
    const bool by_psi = !cfg.psi.empty() || !cfg.sizes.empty();
    if (by_data == by_psi)
        throw Error(Errc::invalid_argument, "give either --counts or --psi/--sizes, not both");
    const auto grid = load_grid(cfg);
    const auto setting = parse_setting(cfg.setting);
    const auto options = curve_options(cfg, setting);

    std::ostringstream os;
    if (by_psi) {
        const auto [psi, sizes] = load_psi(cfg);
        write_curve_csv(os, corroboration_curve(psi, sizes, grid, options));
        emit(cfg.out, os.str());
        return;
    }

    const auto data = load_table(cfg);
    const auto curve = observed_corroboration(data, grid, options);
    if (const auto* t = std::get_if<MissingTable>(&data)) {
        const auto profile = profile_curve(*t, grid);
        const auto mcar = mcar_curve(*t, grid);
        os << "theta,corroboration,profile_std,mcar_std\n";
        for (std::size_t i = 0; i < grid.size(); ++i)
            os << fixed6(grid[i]) << ',' << fixed6(curve.values[i]) << ',' << fixed6(profile[i].standardized) << ','
               << fixed6(mcar[i].standardized) << '\n';
    } else {
        write_curve_csv(os, curve);
    }
    emit(cfg.out, os.str());
}

void cmd_levelset(const RunConfig& cfg)
{
    const auto data = load_table(cfg);
    const auto curve = observed_corroboration(data, load_grid(cfg), curve_options(cfg, setting_of(data)));
    const auto top = max_corroboration_set(curve, 0.0);
    json j;
    j["method"] = method_name(curve.method);
    j["B"] = curve.method == CurveMethod::bootstrap ? json(curve.B) : json(nullptr);
    j["c_max"] = json6(top.c_max);
    j["theta_max"] = json6(top.theta_max);
    j["ml_region"] = to_json(ml_region(data));
    j["alpha_sets"] = json::array();
    if (!cfg.alpha_list.empty()) {
        for (double alpha : parse_list<double>(cfg.alpha_list, "--alpha")) {
            json a = {{"alpha", json6(alpha)}};
            try {
                const auto set = level_set(curve, alpha);
                a["empty"] = false;
                a["lower"] = json6(set.interval.lower);
                a["upper"] = json6(set.interval.upper);
            } catch (const Error& e) {
                if (e.code() != Errc::empty_level_set)
                    throw;
                a["empty"] = true;
                a["lower"] = nullptr;
                a["upper"] = nullptr;
            }
            j["alpha_sets"].push_back(a);
        }
    }
    j["h_sets"] = json::array();
    const std::string hs = cfg.h_list.empty() ? "0" : cfg.h_list;
    for (double h : parse_h_list(hs)) {
        const auto set = max_corroboration_set(curve, h);
        j["h_sets"].push_back({{"h", json6(h)}, {"lower", json6(set.interval.lower)}, {"upper", json6(set.interval.upper)}});
    }
    emit(cfg.out, dump(j));
}

void cmd_assure(const RunConfig& cfg)
{
    const auto data = load_table(cfg);
    AssuranceConfig ac;
    ac.B_outer = cfg.B_outer;
    if (!cfg.inner_method.empty())
        ac.inner_method = parse_method(cfg.inner_method, setting_of(data));
    ac.inner_B = cfg.inner_B;
    ac.master_seed = cfg.seed;
    ac.grid = load_grid(cfg);
    ac.threads = cfg.threads;
    if (cfg.delta_rule == "closed")
        ac.delta_rule = DeltaRule::closed;
    else if (cfg.delta_rule == "strict")
        ac.delta_rule = DeltaRule::strict;
    else
        throw Error(Errc::invalid_argument, "--delta-rule must be 'closed' or 'strict'");

    const auto hs = parse_h_list(cfg.h_list.empty() ? "0,0.01,0.06,0.4,0.8" : cfg.h_list);
    std::vector<AssuranceReport> reports;
    json selected = nullptr;
    if (cfg.tau_min) {
        auto sel = select_h(data, *cfg.tau_min, hs, ac);
        selected = {{"tau_min", json6(*cfg.tau_min)}, {"h", json6(sel.h)}};
        reports = std::move(sel.all);
    } else {
        reports = assurance_bootstrap(data, hs, ac);
    }
    const auto ml_rep = assurance_of_ml_region(data, ac.B_outer, ac.master_seed, ac.delta_rule, ac.threads);

    json j;
    j["setting"] = setting_name(setting_of(data));
    j["ml_region"] = to_json(ml_region(data));
    j["reports"] = json::array();
    for (const auto& r : reports)
        j["reports"].push_back(to_json(r));
    j["ml_region_assurance"] = to_json(ml_rep);
    j["ml_region_assurance"]["inner_method"] = nullptr; // replicate ML regions, no inner curve
    j["selected"] = selected;
    emit(cfg.out, dump(j));
    if (!cfg.csv.empty()) {
        std::ostringstream os;
        write_assurance_csv(os, reports);
        emit(cfg.csv, os.str());
    }
}

void cmd_test(const RunConfig& cfg)
{
    const auto data = load_table(cfg);
    if (cfg.theta_star.empty())
        throw Error(Errc::invalid_argument, "--theta-star is required");
    const auto options = curve_options(cfg, setting_of(data));
    json j = json::array();
    for (double theta : parse_list<double>(cfg.theta_star, "--theta-star"))
        j.push_back(to_json(corroboration_test(data, theta, options, cfg.power_threshold)));
    emit(cfg.out, dump(j));
}

void cmd_simulate(const RunConfig& cfg)
{
    if (!cfg.counts.empty())
        throw Error(Errc::invalid_argument, "simulate takes --psi/--sizes, not --counts");
    const auto [psi, sizes] = load_psi(cfg);
    if (cfg.reps < 1)
        throw Error(Errc::invalid_argument, "--reps must be >= 1");
    CurveOptions options{CurveMethod::bootstrap, cfg.reps, cfg.seed, cfg.threads};
    if (!cfg.method.empty())
        options.method = parse_method(cfg.method, setting_of(psi));
    std::ostringstream os;
    write_curve_csv(os, corroboration_curve(psi, sizes, load_grid(cfg), options));
    emit(cfg.out, os.str());
}

// ---------------------------------------------------------------------------
// --config: a JSON object whose keys are long option names. Its entries are
// spliced in ahead of the user's own flags; every option keeps the last value
// it sees, so flags on the command line win.

std::vector<std::string> config_tokens(const std::string& path, const CLI::App& sub,
                                       const std::vector<CLI::App*>& all_subs)
{
    std::ifstream f(path);
    if (!f)
        throw Error(Errc::invalid_argument, "cannot read config file '" + path + "'");
    json j;
    try {
        j = json::parse(f);
    } catch (const json::parse_error& e) {
        throw Error(Errc::invalid_argument, "config file is not valid JSON: " + std::string(e.what()));
    }
    if (!j.is_object())
        throw Error(Errc::invalid_argument, "config file must hold a JSON object");

    std::vector<std::string> tokens;
    for (const auto& [key, value] : j.items()) {
        const std::string flag = "--" + key;
        if (key == "config")
            throw Error(Errc::invalid_argument, "config files cannot nest --config");
        if (!sub.get_option_no_throw(flag)) {
            bool known = false;
            for (const auto* other : all_subs)
                known = known || other->get_option_no_throw(flag) != nullptr;
            if (!known)
                throw Error(Errc::invalid_argument, "unknown key '" + key + "' in config file");
            continue; // belongs to another subcommand
        }
        std::string text;
        if (value.is_array()) {
            for (std::size_t i = 0; i < value.size(); ++i) {
                if (i)
                    text += ',';
                text += value[i].is_string() ? value[i].get<std::string>() : value[i].dump();
            }
        } else if (value.is_string()) {
            text = value.get<std::string>();
        } else {
            text = value.dump();
        }
        tokens.push_back(flag);
        tokens.push_back(text);
    }
    return tokens;
}

// Subcommands keep only --help so that --h can name the offset list.
CLI::App* add_command(CLI::App& app, const std::string& name, const std::string& description)
{
    auto* sub = app.add_subcommand(name, description);
    sub->set_help_flag("--help", "Print this help message and exit");
    return sub;
}

void add_data_options(CLI::App* sub, RunConfig& cfg)
{
    sub->add_option("--setting", cfg.setting, "missing | matched")->required();
    sub->add_option("--counts", cfg.counts, "missing: n11,n01,n+0; matched: nx,n1,ny,n2");
}

void add_mc_options(CLI::App* sub, RunConfig& cfg)
{
    sub->add_option("--method", cfg.method, "normal | bootstrap (default: normal for missing, bootstrap for matched)");
    sub->add_option("--B", cfg.B, "bootstrap replicates")->capture_default_str();
    sub->add_option("--grid", cfg.grid, "theta grid start:stop:step")->capture_default_str();
}

void add_common_options(CLI::App* sub, RunConfig& cfg, std::string& config_path)
{
    sub->add_option("--seed", cfg.seed, "master seed")->capture_default_str();
    sub->add_option("--threads", cfg.threads, "worker threads (0 = all cores)")->envname("MINFER_THREADS");
    sub->add_option("--out", cfg.out, "output file (default stdout)");
    sub->add_option("--config", config_path, "JSON file of option values; command-line flags override it");
    for (auto* opt : sub->get_options())
        opt->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
}

int report_error(const std::string& msg, int code)
{
    std::cerr << "minfer: " << msg << "\n";
    return code;
}

} // namespace

int run(int argc, char** argv)
{
    RunConfig cfg;
    std::string config_path;
    CLI::App app{"Minimal inference for incomplete 2x2 tables"};
    app.require_subcommand(1);

    auto* analyze = add_command(app, "analyze", "psi^, ML region and likelihood summaries (JSON)");
    add_data_options(analyze, cfg);

    auto* curve = add_command(app, "curve", "corroboration and standardized likelihood curves (CSV)");
    add_data_options(curve, cfg);
    add_mc_options(curve, cfg);
    curve->add_option("--psi", cfg.psi, "evaluate at psi instead of psi^ (with --sizes)");
    curve->add_option("--sizes", cfg.sizes, "missing: n; matched: n1,n2");

    auto* levelset = add_command(app, "levelset", "level sets A_alpha and A^_h of the observed corroboration (JSON)");
    add_data_options(levelset, cfg);
    add_mc_options(levelset, cfg);
    levelset->add_option("--alpha", cfg.alpha_list, "comma-separated alpha levels");
    levelset->add_option("--h", cfg.h_list, "comma-separated offsets h (default 0)");

    auto* assure = add_command(app, "assure", "double-bootstrap assurance of A^_h (JSON, optional CSV)");
    add_data_options(assure, cfg);
    assure->add_option("--grid", cfg.grid, "theta grid start:stop:step")->capture_default_str();
    assure->add_option("--h", cfg.h_list, "comma-separated offsets h (default 0,0.01,0.06,0.4,0.8)");
    assure->add_option("--B-outer", cfg.B_outer, "outer bootstrap replicates")->capture_default_str();
    assure->add_option("--inner-method", cfg.inner_method, "normal | bootstrap");
    assure->add_option("--inner-B", cfg.inner_B, "inner bootstrap replicates")->capture_default_str();
    assure->add_option("--tau-min", cfg.tau_min, "pick the largest h with assurance >= tau-min");
    assure->add_option("--delta-rule", cfg.delta_rule, "closed | strict")->capture_default_str();
    assure->add_option("--csv", cfg.csv, "also write h,tau,L_bar,U_bar rows here");

    auto* test = add_command(app, "test", "Corroboration Test of theta* (JSON)");
    add_data_options(test, cfg);
    add_mc_options(test, cfg);
    test->add_option("--theta-star", cfg.theta_star, "comma-separated theta* values")->required();
    test->add_option("--power-threshold", cfg.power_threshold, "low/high observed power split for the quadrant label")
        ->capture_default_str();

    auto* simulate = add_command(app, "simulate", "actual corroboration curve at a given psi0 (CSV)");
    simulate->add_option("--setting", cfg.setting, "missing | matched")->required();
    simulate->add_option("--psi", cfg.psi, "missing: l11,l01,l+0; matched: l1+,l+1")->required();
    simulate->add_option("--sizes", cfg.sizes, "missing: n; matched: n1,n2")->required();
    simulate->add_option("--reps", cfg.reps, "bootstrap replicates")->capture_default_str();
    simulate->add_option("--grid", cfg.grid, "theta grid start:stop:step")->capture_default_str();
    simulate->add_option("--method", cfg.method, "bootstrap (default) | normal");
    simulate->add_option("--counts", cfg.counts)->group("");

    const std::vector<CLI::App*> subs{analyze, curve, levelset, assure, test, simulate};
    for (auto* sub : subs)
        add_common_options(sub, cfg, config_path);

    try {
        // Splice --config values in front of the user's flags.
        std::vector<std::string> args(argv + 1, argv + argc);
        std::optional<std::string> cfg_file;
        for (std::size_t i = 0; i < args.size(); ++i) {
            if (args[i] == "--config" && i + 1 < args.size())
                cfg_file = args[i + 1];
            else if (args[i].rfind("--config=", 0) == 0)
                cfg_file = args[i].substr(9);
        }
        if (cfg_file && !args.empty()) {
            const auto* sub = app.get_subcommand_no_throw(args.front());
            if (sub) {
                auto extra = config_tokens(*cfg_file, *sub, subs);
                args.insert(args.begin() + 1, extra.begin(), extra.end());
            }
        }
        std::reverse(args.begin(), args.end()); // CLI11 consumes vectors from the back
        app.parse(args);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        return report_error(e.what(), 1);
    } catch (const Error& e) {
        return report_error(e.what(), 1);
    }

    try {
        if (*analyze)
            cmd_analyze(cfg);
        else if (*curve)
            cmd_curve(cfg);
        else if (*levelset)
            cmd_levelset(cfg);
        else if (*assure)
            cmd_assure(cfg);
        else if (*test)
            cmd_test(cfg);
        else if (*simulate)
            cmd_simulate(cfg);
    } catch (const Error& e) {
        return report_error(e.what(), is_validation_error(e.code()) ? 1 : 2);
    } catch (const std::exception& e) {
        return report_error(e.what(), 2);
    }
    return 0;
}

int main(int argc, char** argv)
{
    return run(argc, argv);
}
