#include "cli.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"

#include "sdp/portrait.hpp"

namespace sdp::cli {

namespace {

// Thrown for anything the user has to fix in the configuration (exit 2).
struct ConfigError : Error {
    using Error::Error;
};

struct IoError : Error {
    using Error::Error;
};

const std::vector<std::string> kOptionKeys{"tol", "epsilon", "out", "format", "mode", "eq", "branch", "D_min", "D_max"};

template <typename T>
void read_opt(const Json& j, const char* key, std::optional<T>& dst)
{
    if (!j.contains(key) || j.at(key).is_null())
        return;
    try {
        dst = j.at(key).get<T>();
    } catch (const nlohmann::json::exception&) {
        throw ConfigError(std::string("option '") + key + "' has the wrong type");
    }
}

void reject_unknown(const Json& j, const std::vector<std::string>& allowed, const std::string& where)
{
    for (const auto& [key, value] : j.items())
        if (std::find(allowed.begin(), allowed.end(), key) == allowed.end())
            throw ConfigError("unknown key '" + key + "' in " + where);
}

} // namespace

RunConfig config_from_json(const Json& j)
{
    if (!j.is_object())
        throw ConfigError("config must be a JSON object");
    reject_unknown(j, {"params", "command", "options"}, "config");
    RunConfig cfg;
    if (j.contains("params")) {
        const Json& p = j["params"];
        if (!p.is_object())
            throw ConfigError("params must be an object");
        reject_unknown(p, {"D", "alpha", "mu"}, "params");
        read_opt(p, "D", cfg.D);
        read_opt(p, "alpha", cfg.alpha);
        read_opt(p, "mu", cfg.mu);
    }
    if (j.contains("command")) {
        if (!j["command"].is_string())
            throw ConfigError("command must be a string");
        cfg.command = j["command"].get<std::string>();
    }
    if (j.contains("options")) {
        const Json& o = j["options"];
        if (!o.is_object())
            throw ConfigError("options must be an object");
        reject_unknown(o, kOptionKeys, "options");
        read_opt(o, "tol", cfg.tol);
        read_opt(o, "epsilon", cfg.epsilon);
        read_opt(o, "out", cfg.out);
        read_opt(o, "format", cfg.format);
        std::optional<std::string> mode;
        read_opt(o, "mode", mode);
        if (mode)
            cfg.mode = *mode;
        read_opt(o, "eq", cfg.eq);
        read_opt(o, "branch", cfg.branch);
        read_opt(o, "D_min", cfg.D_min);
        read_opt(o, "D_max", cfg.D_max);
    }
    return cfg;
}

Json to_json(const RunConfig& cfg)
{
    auto opt = [](const auto& o) { return o ? Json(*o) : Json(nullptr); };
    Json j;
    j["params"] = Json{{"D", opt(cfg.D)}, {"alpha", opt(cfg.alpha)}, {"mu", opt(cfg.mu)}};
    j["command"] = cfg.command;
    j["options"] = Json{{"tol", opt(cfg.tol)},       {"epsilon", opt(cfg.epsilon)}, {"out", opt(cfg.out)},
                        {"format", opt(cfg.format)}, {"mode", cfg.mode},            {"eq", opt(cfg.eq)},
                        {"branch", opt(cfg.branch)}, {"D_min", opt(cfg.D_min)},     {"D_max", opt(cfg.D_max)}};
    return j;
}

namespace {

ModelParams require_params(const RunConfig& cfg)
{
    if (!cfg.D || !cfg.alpha || !cfg.mu)
        throw ConfigError("--D, --alpha and --mu are required");
    return make_params(*cfg.D, *cfg.alpha, *cfg.mu);
}

IntegrateOptions integrate_options(const RunConfig& cfg)
{
    IntegrateOptions o;
    if (cfg.tol) {
        if (!(*cfg.tol > 0.0 && *cfg.tol < 1e-2))
            throw ConfigError("--tol must lie in (0, 1e-2)");
        o.control.rtol = *cfg.tol;
        o.control.atol = 1e-2 * *cfg.tol;
    }
    return o;
}

std::optional<double> launch_epsilon(const RunConfig& cfg)
{
    if (cfg.epsilon && !(*cfg.epsilon > 0.0 && *cfg.epsilon < 1e-2))
        throw ConfigError("--epsilon must lie in (0, 1e-2)");
    return cfg.epsilon;
}

ClassifyMode classify_mode(const RunConfig& cfg)
{
    if (cfg.mode == "x")
        return ClassifyMode::XMode;
    if (cfg.mode == "tau")
        return ClassifyMode::TauMode;
    throw ConfigError("--mode must be x or tau");
}

std::string format_for(const RunConfig& cfg, const std::vector<std::string>& allowed)
{
    const std::string f = cfg.format.value_or(allowed.front());
    if (std::find(allowed.begin(), allowed.end(), f) == allowed.end())
        throw ConfigError("format '" + f + "' is not available for " + cfg.command);
    return f;
}

void write_file(const std::filesystem::path& path, const std::string& text)
{
    if (path.empty())
        throw IoError("empty output path");
    std::ofstream f(path, std::ios::binary);
    if (!f)
        throw IoError("cannot open " + path.string() + " for writing");
    f << text;
    if (!f)
        throw IoError("write to " + path.string() + " failed");
}

// Writes to --out when given, to `out` otherwise.
void emit(const RunConfig& cfg, std::ostream& out, const std::string& text)
{
    if (cfg.out)
        write_file(*cfg.out, text);
    else
        out << text;
}

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

Json report(const RunConfig& cfg, Json result)
{
    return Json{{"config", to_json(cfg)}, {"result", std::move(result)}};
}

int cmd_equilibria(const RunConfig& cfg, std::ostream& out)
{
    const ModelParams p = require_params(cfg);
    format_for(cfg, {"json"});
    emit(cfg, out, dump(report(cfg, equilibria_json(p))));
    return kOk;
}

std::string orbit_csv(const Orbit& o, const ModelParams& p)
{
    std::ostringstream os;
    write_orbit_csv(os, o, p);
    return os.str();
}

int cmd_portrait(const RunConfig& cfg, std::ostream& out)
{
    const ModelParams p = require_params(cfg);
    format_for(cfg, {"svg"});
    if (cfg.out && cfg.out->empty())
        throw IoError("empty output path");
    GraphOptions go;
    go.epsilon = launch_epsilon(cfg);
    go.integrate = integrate_options(cfg);
    const ConnectionGraph g = connection_graph(p, go);
    const Portrait portrait = render_portrait(p, g);
    emit(cfg, out, portrait.svg);
    if (!cfg.out)
        return kOk;

    // Orbit bundle next to the SVG: <stem>_orbits/index.json and one CSV per orbit.
    const std::filesystem::path svg_path(*cfg.out);
    const std::filesystem::path dir = svg_path.parent_path() / (svg_path.stem().string() + "_orbits");
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec)
        throw IoError("cannot create " + dir.string() + ": " + ec.message());
    Json index = Json::array();
    auto add = [&](const Orbit& o, const std::string& kind, const std::string& launch, std::size_t i) {
        char name[32];
        std::snprintf(name, sizeof name, "%s_%02zu.csv", kind.c_str(), i);
        write_file(dir / name, orbit_csv(o, p));
        Json h = orbit_header_json(o);
        h["file"] = name;
        h["launch"] = launch;
        index.push_back(h);
    };
    for (std::size_t i = 0; i < g.orbits.size(); ++i)
        add(g.orbits[i], "orbit", g.launches[i], i);
    for (std::size_t i = 0; i < portrait.periodic.size(); ++i)
        add(portrait.periodic[i], "periodic", "closed orbit", i);
    write_file(dir / "index.json", dump(report(cfg, index)));
    return kOk;
}

Branch default_branch(const Equilibrium& eq)
{
    return eq.stability == Stability::StableNode ? Branch::StablePlus : Branch::UnstablePlus;
}

Json auto_fits(const Orbit& o, const ModelParams& p, ClassifyMode mode)
{
    Json fits = Json::array();
    for (Side side : {Side::Left, Side::Right}) {
        const auto& eq = side == Side::Left ? o.source : o.target;
        if (!eq)
            continue;
        FitWindow w;
        w.side = side;
        switch (canonical(*eq)) {
        case EquilibriumId::E1:
            w.form = FitForm::ExpDecayToLevel;
            w.level = 1.0;
            break;
        case EquilibriumId::E2:
            w.level = p.u_singular();
            if (mode == ClassifyMode::XMode) {
                w.form = FitForm::LinearHit;
                w.band = 0.01;
            } else {
                w.form = FitForm::ExpDecayToLevel;
            }
            break;
        case EquilibriumId::E3:
        case EquilibriumId::E4:
            w.form = mode == ClassifyMode::XMode ? FitForm::ExpGrowth : FitForm::PowerBlowup;
            break;
        default: continue; // u -> -inf: no fit form
        }
        Json entry{{"side", std::string(to_string(side))}, {"eq", std::string(to_string(*eq))}};
        try {
            entry["fit"] = to_json(fit_asymptotics(o, w));
        } catch (const FitError& e) {
            entry["error"] = e.what();
        }
        fits.push_back(entry);
    }
    return fits;
}

int cmd_shoot(const RunConfig& cfg, std::ostream& out)
{
    const ModelParams p = require_params(cfg);
    const std::string fmt = format_for(cfg, {"json", "csv"});
    const ClassifyMode mode = classify_mode(cfg);
    if (!cfg.eq)
        throw ConfigError("shoot needs --eq");
    EquilibriumId id;
    try {
        id = equilibrium_from_string(*cfg.eq);
    } catch (const Error& e) {
        throw ConfigError(e.what());
    }
    const Equilibrium eq = equilibrium(p, id);
    Branch branch = default_branch(eq);
    if (cfg.branch) {
        try {
            branch = branch_from_string(*cfg.branch);
        } catch (const Error& e) {
            throw ConfigError(e.what());
        }
    }
    Orbit raw;
    try {
        raw = shoot_saddle(p, eq, branch, launch_epsilon(cfg), integrate_options(cfg));
    } catch (const InvalidBranchError& e) {
        throw ConfigError(e.what());
    }

    Json result;
    Orbit orbit = raw;
    try {
        orbit = mode == ClassifyMode::XMode ? reparameterize_to_x(raw, p) : reparameterize_to_tau(raw, p);
        result["reparameterized"] = true;
    } catch (const ReparameterizationError& e) {
        result["reparameterized"] = false;
        result["reparameterization_error"] = e.what();
    }
    try {
        result["type"] = stationary_type(raw, mode).label();
    } catch (const UnclassifiableError& e) {
        result["type"] = nullptr;
        result["type_error"] = e.what();
    }
    result["h_drift"] = real_json(h_drift(raw, p));
    result["orbit"] = orbit_header_json(orbit);
    // Fits need a single physical clock along the orbit.
    result["fits"] = result["reparameterized"].get<bool>() ? auto_fits(orbit, p, mode) : Json::array();

    const std::string csv = orbit_csv(orbit, p);
    if (fmt == "csv") {
        emit(cfg, out, csv);
        return kOk;
    }
    emit(cfg, out, dump(report(cfg, result)));
    if (cfg.out) {
        std::filesystem::path csv_path(*cfg.out);
        csv_path.replace_extension(".csv");
        write_file(csv_path, csv);
    }
    return kOk;
}

int cmd_classify(const RunConfig& cfg, std::ostream& out)
{
    const ModelParams p = require_params(cfg);
    format_for(cfg, {"json"});
    GraphOptions go;
    go.epsilon = launch_epsilon(cfg);
    go.integrate = integrate_options(cfg);
    const RegimeReport r = regime_report(p, classify_mode(cfg), go);
    emit(cfg, out, dump(report(cfg, to_json(r))));
    return r.match ? kOk : kFailure;
}

int cmd_scan(const RunConfig& cfg, std::ostream& out)
{
    if (!cfg.alpha || !cfg.mu)
        throw ConfigError("scan needs --alpha and --mu");
    if (!cfg.D_min || !cfg.D_max)
        throw ConfigError("scan needs --D-min and --D-max");
    format_for(cfg, {"json"});
    make_params(1.0, *cfg.alpha, *cfg.mu); // validates alpha and mu
    ScanResult s;
    try {
        s = bifurcation_scan(*cfg.alpha, *cfg.mu, *cfg.D_min, *cfg.D_max);
    } catch (const BracketError& e) {
        throw ConfigError(e.what());
    }
    emit(cfg, out, dump(report(cfg, to_json(s))));
    return s.cross_checked ? kOk : kFailure;
}

int cmd_check(const RunConfig& cfg, std::ostream& out)
{
    const ModelParams p = require_params(cfg);
    format_for(cfg, {"text"});
    std::ostringstream os;
    os << "# config " << to_json(cfg).dump() << "\n";
    bool all = true;
    for (const CheckLine& c : check_suite(p, integrate_options(cfg))) {
        os << (c.pass ? "PASS " : "FAIL ") << c.name;
        if (!c.detail.empty())
            os << ": " << c.detail;
        os << "\n";
        all = all && c.pass;
    }
    emit(cfg, out, os.str());
    return all ? kOk : kFailure;
}

} // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Phase portraits of the stationary self-diffusion logistic equation", "sdportrait"};
    std::string command;
    std::string config_path;
    std::optional<double> D, alpha, mu, tol, epsilon, D_min, D_max;
    std::optional<std::string> out_path, format, mode, eq, branch;
    app.add_option("command", command, "equilibria | portrait | shoot | classify | scan | check");
    app.add_option("--config", config_path, "JSON config file; flags override its values");
    app.add_option("--D", D, "linear diffusion D > 0");
    app.add_option("--alpha", alpha, "self-diffusion alpha > 0");
    app.add_option("--mu", mu, "growth rate mu > 0");
    app.add_option("--tol", tol, "relative integration tolerance");
    app.add_option("--epsilon", epsilon, "launch offset from the equilibrium");
    app.add_option("--out", out_path, "output file (stdout when absent)");
    app.add_option("--format", format, "json | csv | svg | text");
    app.add_option("--mode", mode, "x | tau");
    app.add_option("--eq", eq, "equilibrium to shoot from (E0..E10)");
    app.add_option("--branch", branch, "UnstablePlus | UnstableMinus | StablePlus | StableMinus");
    app.add_option("--D-min", D_min, "scan range start");
    app.add_option("--D-max", D_max, "scan range end");

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n";
        return kConfigError;
    }

    try {
        RunConfig cfg;
        if (!config_path.empty()) {
            std::ifstream f(config_path);
            if (!f)
                throw IoError("cannot read config " + config_path);
            Json j;
            try {
                j = Json::parse(f);
            } catch (const nlohmann::json::parse_error& e) {
                throw ConfigError(std::string("config is not valid JSON: ") + e.what());
            }
            cfg = config_from_json(j);
        }
        if (!command.empty())
            cfg.command = command;
        auto over = [](auto& dst, const auto& src) {
            if (src)
                dst = *src;
        };
        over(cfg.D, D);
        over(cfg.alpha, alpha);
        over(cfg.mu, mu);
        over(cfg.tol, tol);
        over(cfg.epsilon, epsilon);
        over(cfg.out, out_path);
        over(cfg.format, format);
        if (mode)
            cfg.mode = *mode;
        over(cfg.eq, eq);
        over(cfg.branch, branch);
        over(cfg.D_min, D_min);
        over(cfg.D_max, D_max);

        if (cfg.command.empty())
            throw ConfigError("no command given");
        classify_mode(cfg);
        if (cfg.command == "equilibria")
            return cmd_equilibria(cfg, out);
        if (cfg.command == "portrait")
            return cmd_portrait(cfg, out);
        if (cfg.command == "shoot")
            return cmd_shoot(cfg, out);
        if (cfg.command == "classify")
            return cmd_classify(cfg, out);
        if (cfg.command == "scan")
            return cmd_scan(cfg, out);
        if (cfg.command == "check")
            return cmd_check(cfg, out);
        throw ConfigError("unknown command '" + cfg.command + "'");
    } catch (const IoError& e) {
        err << "error: " << e.what() << "\n";
        return kIoError;
    } catch (const ConfigError& e) {
        err << "error: " << e.what() << "\n";
        return kConfigError;
    } catch (const ParameterDomainError& e) {
        err << "error: " << e.what() << "\n";
        return kConfigError;
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return kFailure;
    }
}

} // namespace sdp::cli
