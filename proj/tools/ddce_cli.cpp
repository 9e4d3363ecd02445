// Command-line driver: dataset generation, training, Monte Carlo sweeps,
// tracking exports, flop counts and CSV reporting.
//
// Exit codes: 0 success, 2 configuration error, 3 runtime failure.
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <thread>
#include <sstream>

#include "CLI11.hpp"
#include "ddce/errors.hpp"
#include "ddce/harness.hpp"
#include "ddce/rng.hpp"

namespace {

using namespace ddce;

struct Options {
    std::string config_path;
    std::string code = "alamouti";
    int constellation_order = 4;
    std::string predictor = "dl-dd";
    std::string predictors; // comma list for sweeps; falls back to `predictor`
    std::string decoder = "ml-gaussian";
    int nt = -1; // spatial multiplexing / flops only; other codes fix n_t
    int nr = 2;
    int np = 10;
    int nb = 45;
    double rho_min = 0.0;
    double rho_max = 0.1;
    std::string scenario; // named ranges, comma separated
    double k_factor = 0.0;
    double f_los = -1.0;
    double alpha0 = 0.0;
    std::string snr_db = "0,5,10,15,20";
    double snr_one = 15.0;
    long trials = 2000;
    uint64_t seed = 1;
    std::string model_path;
    std::string out_path = "out.csv";
    std::string in_path;
    int workers = 1;
    int epochs = 200;
    int n_samples = 10000;
    int batch_size = 10;
    double learning_rate = 1e-3;
    std::string activation = "clipped";
    double rho = 0.05; // tracking
    std::string nb_list = "20,45,95";
    bool no_calibration = false;
};

std::vector<std::string> split_list(const std::string& csv) {
    std::vector<std::string> out;
    std::istringstream in(csv);
    std::string tok;
    while (std::getline(in, tok, ','))
        if (!tok.empty()) out.push_back(tok);
    return out;
}

std::vector<double> parse_doubles(const std::string& csv) {
    std::vector<double> out;
    for (const std::string& tok : split_list(csv)) {
        try {
            out.push_back(std::stod(tok));
        } catch (...) {
            throw ConfigError("bad number in list: " + tok);
        }
    }
    return out;
}

std::vector<int> parse_ints(const std::string& csv) {
    std::vector<int> out;
    for (const std::string& tok : split_list(csv)) {
        try {
            out.push_back(std::stoi(tok));
        } catch (...) {
            throw ConfigError("bad integer in list: " + tok);
        }
    }
    return out;
}

// Flat key = value file; '#' starts a comment.
void load_config_file(const std::string& path, Options& opt) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const size_t hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        const size_t eq = line.find('=');
        if (eq == std::string::npos) {
            if (line.find_first_not_of(" \t\r") != std::string::npos)
                throw ConfigError(path + ":" + std::to_string(lineno) + ": expected key = value");
            continue;
        }
        auto trim = [](std::string s) {
            const size_t a = s.find_first_not_of(" \t\r");
            const size_t b = s.find_last_not_of(" \t\r");
            return a == std::string::npos ? std::string{} : s.substr(a, b - a + 1);
        };
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        try {
            if (key == "code") opt.code = value;
            else if (key == "constellation_order") opt.constellation_order = std::stoi(value);
            else if (key == "predictor") opt.predictor = value;
            else if (key == "predictors") opt.predictors = value;
            else if (key == "decoder") opt.decoder = value;
            else if (key == "nt") opt.nt = std::stoi(value);
            else if (key == "nr") opt.nr = std::stoi(value);
            else if (key == "np") opt.np = std::stoi(value);
            else if (key == "nb") opt.nb = std::stoi(value);
            else if (key == "rho_min") opt.rho_min = std::stod(value);
            else if (key == "rho_max") opt.rho_max = std::stod(value);
            else if (key == "rho") opt.rho = std::stod(value);
            else if (key == "scenario") opt.scenario = value;
            else if (key == "k_factor") opt.k_factor = std::stod(value);
            else if (key == "f_los") opt.f_los = std::stod(value);
            else if (key == "alpha0") opt.alpha0 = std::stod(value);
            else if (key == "snr_db") opt.snr_db = value;
            else if (key == "snr") opt.snr_one = std::stod(value);
            else if (key == "trials") opt.trials = std::stol(value);
            else if (key == "seed") opt.seed = std::stoull(value);
            else if (key == "model_path") opt.model_path = value;
            else if (key == "out_path") opt.out_path = value;
            else if (key == "workers") opt.workers = std::stoi(value);
            else if (key == "epochs") opt.epochs = std::stoi(value);
            else if (key == "n_samples") opt.n_samples = std::stoi(value);
            else if (key == "batch_size") opt.batch_size = std::stoi(value);
            else if (key == "learning_rate") opt.learning_rate = std::stod(value);
            else if (key == "activation") opt.activation = value;
            else if (key == "nb_list") opt.nb_list = value;
            else throw ConfigError(path + ":" + std::to_string(lineno) + ": unknown key '" + key + "'");
        } catch (const ConfigError&) {
            throw;
        } catch (...) {
            throw ConfigError(path + ":" + std::to_string(lineno) + ": bad value for '" + key + "'");
        }
    }
}

StbcCode make_code(const Options& opt) {
    if (opt.code == "smux") {
        if (opt.nt < 1) throw ConfigError("code smux requires nt");
        return StbcCode::spatial_mux(opt.nt);
    }
    return code_by_name(opt.code);
}

ChannelTemplate make_channel(const Options& opt) {
    ChannelTemplate ch;
    ch.kind = opt.k_factor > 0.0 ? FadingKind::Rician : FadingKind::Rayleigh;
    ch.k_factor = opt.k_factor;
    ch.f_los = opt.f_los;
    ch.alpha0 = opt.alpha0;
    return ch;
}

std::vector<DopplerScenario> make_scenarios(const Options& opt) {
    std::vector<DopplerScenario> out;
    if (!opt.scenario.empty()) {
        for (const std::string& name : split_list(opt.scenario)) out.push_back(scenario_by_name(name));
    } else {
        char label[64];
        std::snprintf(label, sizeof label, "rho%.4g-%.4g", opt.rho_min, opt.rho_max);
        out.push_back({label, {opt.rho_min, opt.rho_max}});
    }
    return out;
}

std::vector<std::string> config_echo(const Options& opt) {
    std::vector<std::string> lines;
    auto add = [&lines](const std::string& k, const std::string& v) { lines.push_back(k + " = " + v); };
    add("code", opt.code);
    add("constellation_order", std::to_string(opt.constellation_order));
    add("predictors", opt.predictors.empty() ? opt.predictor : opt.predictors);
    add("decoder", opt.decoder);
    add("nr", std::to_string(opt.nr));
    add("np", std::to_string(opt.np));
    add("nb", std::to_string(opt.nb));
    add("scenario", opt.scenario.empty() ? "custom" : opt.scenario);
    add("rho_min", std::to_string(opt.rho_min));
    add("rho_max", std::to_string(opt.rho_max));
    add("snr_db", opt.snr_db);
    add("trials", std::to_string(opt.trials));
    add("workers", std::to_string(opt.workers));
    add("model_path", opt.model_path);
    return lines;
}

MlpModelPair load_model_checked(const Options& opt) {
    if (opt.model_path.empty()) throw ConfigError("model_path is required for this command");
    if (!std::filesystem::exists(opt.model_path))
        throw ConfigError("model_path does not exist: " + opt.model_path);
    return load_model(opt.model_path);
}

bool needs_model(const std::vector<PredictorChoice>& preds) {
    for (const PredictorChoice& p : preds)
        if (!p.genie && p.kind == PredictorKind::DlDd) return true;
    return false;
}

ExperimentConfig make_experiment(const Options& opt, const MlpModelPair* model) {
    ExperimentConfig cfg;
    cfg.code = make_code(opt);
    cfg.constellation = Constellation::qam(opt.constellation_order);
    const std::string preds = opt.predictors.empty() ? opt.predictor : opt.predictors;
    for (const std::string& name : split_list(preds)) cfg.predictors.push_back(PredictorChoice::parse(name));
    cfg.decoder = decoder_by_name(opt.decoder);
    cfg.n_r = opt.nr;
    cfg.n_p = opt.np;
    cfg.n_b = opt.nb;
    cfg.snr_db = parse_doubles(opt.snr_db);
    cfg.trials = opt.trials;
    cfg.scenarios = make_scenarios(opt);
    cfg.channel = make_channel(opt);
    cfg.base_seed = opt.seed;
    cfg.workers = opt.workers;
    cfg.calibrate = !opt.no_calibration;
    cfg.model = model;
    return cfg;
}

int cmd_gen_data(const Options& opt) {
    const StbcCode code = make_code(opt);
    const PredictorDims dims{code.n_t, opt.nr, opt.np, code.n_x};
    TrainConfig cfg;
    cfg.n_samples = opt.n_samples;
    cfg.rho_range = {opt.rho_min, opt.rho_max};
    cfg.seed = opt.seed;

    std::ofstream out(opt.out_path);
    if (!out) throw ConfigError("cannot open output: " + opt.out_path);
    out << "part,row";
    for (int i = 0; i < dims.input_width(); ++i) out << ",x" << i;
    for (int i = 0; i < dims.target_width(); ++i) out << ",t" << i;
    out << "\n";
    char buf[32];
    for (Part part : {Part::Real, Part::Imag}) {
        const Dataset d = make_dataset(cfg, dims, make_channel(opt), part,
                                       mix_seed(opt.seed, part == Part::Real ? 1 : 2));
        for (int j = 0; j < d.rows; ++j) {
            out << (part == Part::Real ? "re" : "im") << "," << j;
            for (int i = 0; i < d.input_width; ++i) {
                std::snprintf(buf, sizeof buf, ",%.17g", d.input_row(j)[i]);
                out << buf;
            }
            for (int i = 0; i < d.target_width; ++i) {
                std::snprintf(buf, sizeof buf, ",%.17g", d.target_row(j)[i]);
                out << buf;
            }
            out << "\n";
        }
    }
    std::cout << "wrote " << 2 * opt.n_samples << " rows to " << opt.out_path << "\n";
    return 0;
}

int cmd_train(const Options& opt) {
    if (opt.model_path.empty()) throw ConfigError("model_path is required: where to save the model");
    const StbcCode code = make_code(opt);
    const PredictorDims dims{code.n_t, opt.nr, opt.np, code.n_x};
    TrainConfig cfg;
    cfg.n_samples = opt.n_samples;
    cfg.batch_size = opt.batch_size;
    cfg.epochs = opt.epochs;
    cfg.learning_rate = opt.learning_rate;
    cfg.rho_range = {opt.rho_min, opt.rho_max};
    cfg.seed = opt.seed;
    const Activation act = opt.activation == "literal" ? Activation::Literal : Activation::Clipped;

    // The two parts are independent; train them concurrently.
    TrainResult results[2];
    auto train_part = [&](Part part) {
        const Dataset d = make_dataset(cfg, dims, make_channel(opt), part,
                                       mix_seed(opt.seed, part == Part::Real ? 1 : 2));
        MlpModel m = MlpModel::init({dims.input_width(), 128, 128, dims.target_width()}, act,
                                    mix_seed(opt.seed, part == Part::Real ? 3 : 4));
        results[part == Part::Real ? 0 : 1] = train(std::move(m), d, cfg);
    };
    std::thread imag_thread(train_part, Part::Imag);
    train_part(Part::Real);
    imag_thread.join();

    MlpModelPair pair;
    pair.real_net = std::move(results[0].model);
    pair.imag_net = std::move(results[1].model);

    std::ofstream loss_csv(opt.out_path);
    if (!loss_csv) throw ConfigError("cannot open output: " + opt.out_path);
    loss_csv << "part,epoch,train_loss,val_loss\n";
    char buf[96];
    for (int i = 0; i < 2; ++i) {
        const char* label = i == 0 ? "re" : "im";
        for (size_t e = 0; e < results[i].train_loss.size(); ++e) {
            std::snprintf(buf, sizeof buf, "%s,%zu,%.10e,%.10e\n", label, e, results[i].train_loss[e],
                          results[i].val_loss[e]);
            loss_csv << buf;
        }
        std::cout << label << ": final train loss " << results[i].train_loss.back() << ", val loss "
                  << results[i].val_loss.back() << "\n";
    }
    save_model(pair, opt.model_path);
    std::cout << "saved model to " << opt.model_path << "\n";
    return 0;
}

int cmd_sweep(const Options& opt) {
    std::optional<MlpModelPair> model;
    ExperimentConfig cfg = make_experiment(opt, nullptr);
    if (needs_model(cfg.predictors)) {
        model = load_model_checked(opt);
        cfg.model = &*model;
    }
    const std::vector<BerRecord> records = run_ber_sweep(cfg);
    write_ber_csv(records, opt.out_path);
    write_manifest(opt.out_path, config_echo(opt), opt.seed);
    std::cout << "wrote " << records.size() << " records to " << opt.out_path << "\n";
    return 0;
}

int cmd_simulate(const Options& opt) {
    Options one = opt;
    char snr[32];
    std::snprintf(snr, sizeof snr, "%.10g", opt.snr_one);
    one.snr_db = snr;
    std::optional<MlpModelPair> model;
    ExperimentConfig cfg = make_experiment(one, nullptr);
    if (needs_model(cfg.predictors)) {
        model = load_model_checked(opt);
        cfg.model = &*model;
    }
    const std::vector<BerRecord> records = run_ber_sweep(cfg);
    write_ber_csv(records, opt.out_path);
    write_manifest(opt.out_path, config_echo(one), opt.seed);
    for (const BerRecord& r : records)
        std::cout << r.scenario << " snr " << r.snr_db << " dB " << r.predictor << ": ber " << r.ber
                  << " (" << r.bit_errors << "/" << r.total_bits << ")\n";
    return 0;
}

int cmd_length_sweep(const Options& opt) {
    std::optional<MlpModelPair> model;
    ExperimentConfig cfg = make_experiment(opt, nullptr);
    if (needs_model(cfg.predictors)) {
        model = load_model_checked(opt);
        cfg.model = &*model;
    }
    const std::vector<PacketLengthRecord> records = run_packet_length_sweep(cfg, parse_ints(opt.nb_list));
    write_packet_length_csv(records, opt.out_path);
    write_manifest(opt.out_path, config_echo(opt), opt.seed);
    std::cout << "wrote " << records.size() << " records to " << opt.out_path << "\n";
    return 0;
}

int cmd_track(const Options& opt) {
    TrackingConfig cfg;
    cfg.predictor = PredictorChoice::parse(opt.predictor);
    cfg.decoder = decoder_by_name(opt.decoder);
    cfg.code = make_code(opt);
    cfg.constellation = Constellation::qam(opt.constellation_order);
    cfg.n_r = opt.nr;
    cfg.n_p = opt.np;
    cfg.n_b = opt.nb;
    cfg.rho = opt.rho;
    cfg.rho_range = {opt.rho_min, opt.rho_max};
    cfg.channel = make_channel(opt);
    cfg.snr_db = opt.snr_one;
    cfg.seed = opt.seed;
    std::optional<MlpModelPair> model;
    if (!cfg.predictor.genie && cfg.predictor.kind == PredictorKind::DlDd) {
        model = load_model_checked(opt);
        cfg.model = &*model;
    }
    run_tracking(cfg, opt.out_path);
    std::cout << "wrote tracking data to " << opt.out_path << "\n";
    return 0;
}

int cmd_flops(const Options& opt) {
    FlopParams p;
    p.n_t = opt.nt > 0 ? opt.nt : make_code(opt).n_t;
    p.n_r = opt.nr;
    p.n_x = opt.code == "smux" && opt.nt < 1 ? 1 : make_code(opt).n_x;
    p.n_p = opt.np;
    std::cout << flops(opt.predictor, p) << "\n";
    return 0;
}

int cmd_report(const Options& opt) {
    if (opt.in_path.empty()) throw ConfigError("report requires --in with a sweep CSV");
    const std::vector<BerRecord> records = read_ber_csv(opt.in_path);
    write_report_csv(records, opt.out_path);
    std::cout << "wrote " << records.size() << " rows to " << opt.out_path << "\n";
    return 0;
}

std::string find_config_arg(int argc, char** argv) {
    for (int i = 1; i < argc; ++i) {
        const std::string arg = argv[i];
        if (arg == "--config" && i + 1 < argc) return argv[i + 1];
        if (arg.rfind("--config=", 0) == 0) return arg.substr(9);
    }
    return {};
}

} // namespace

int main(int argc, char** argv) {
    Options opt;
    // The config file provides defaults; explicit flags override them in the
    // single CLI parse below.
    try {
        const std::string config = find_config_arg(argc, argv);
        if (!config.empty()) load_config_file(config, opt);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    }

    CLI::App app{"link-level simulator for decision-directed MIMO channel estimation"};
    app.require_subcommand(1);
    std::string sub;

    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--config", opt.config_path, "flat key = value config file");
        cmd->add_option("--code", opt.code, "alamouti|tarokh34|rate34|smux1..4");
        cmd->add_option("--constellation-order", opt.constellation_order, "4|16|64");
        cmd->add_option("--predictor", opt.predictor, "dl-dd|wiener-np|kalman-ar1|cc|genie");
        cmd->add_option("--predictors", opt.predictors, "comma list for sweeps");
        cmd->add_option("--decoder", opt.decoder, "ml-gaussian|ls-euclidean|alamouti-ls");
        cmd->add_option("--nt", opt.nt, "transmit antennas (smux, flops)");
        cmd->add_option("--nr", opt.nr, "receive antennas");
        cmd->add_option("--np", opt.np, "pilot length");
        cmd->add_option("--nb", opt.nb, "blocks per packet");
        cmd->add_option("--rho-min", opt.rho_min, "Doppler range lower edge");
        cmd->add_option("--rho-max", opt.rho_max, "Doppler range upper edge");
        cmd->add_option("--scenario", opt.scenario, "pedestrians|cars|trains (comma list)");
        cmd->add_option("--k-factor", opt.k_factor, "Rician K factor");
        cmd->add_option("--f-los", opt.f_los, "LOS Doppler (default: tracks rho)");
        cmd->add_option("--alpha0", opt.alpha0, "LOS arrival angle [rad]");
        cmd->add_option("--snr-db", opt.snr_db, "SNR list in dB (sweep)");
        cmd->add_option("--snr", opt.snr_one, "single SNR in dB (simulate/track)");
        cmd->add_option("--trials", opt.trials, "packets per sweep point");
        cmd->add_option("--seed", opt.seed, "base seed");
        cmd->add_option("--model-path", opt.model_path, "model file");
        cmd->add_option("--out", opt.out_path, "output path");
        cmd->add_option("--in", opt.in_path, "input path (report)");
        cmd->add_option("--workers", opt.workers, "worker threads for sweeps");
        cmd->add_option("--epochs", opt.epochs, "training epochs");
        cmd->add_option("--n-samples", opt.n_samples, "training set size");
        cmd->add_option("--batch-size", opt.batch_size, "mini-batch size");
        cmd->add_option("--learning-rate", opt.learning_rate, "Adam learning rate");
        cmd->add_option("--activation", opt.activation, "clipped|literal");
        cmd->add_option("--rho", opt.rho, "exact Doppler rate (track)");
        cmd->add_option("--nb-list", opt.nb_list, "comma list of block counts (length-sweep)");
        cmd->add_flag("--no-calibration", opt.no_calibration, "skip the AWGN calibration gate");
    };

    for (const char* name : {"gen-data", "train", "simulate", "sweep", "length-sweep", "track",
                             "flops", "report"}) {
        CLI::App* cmd = app.add_subcommand(name);
        add_common(cmd);
        cmd->callback([&sub, name] { sub = name; });
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (sub == "gen-data") return cmd_gen_data(opt);
        if (sub == "train") return cmd_train(opt);
        if (sub == "simulate") return cmd_simulate(opt);
        if (sub == "sweep") return cmd_sweep(opt);
        if (sub == "length-sweep") return cmd_length_sweep(opt);
        if (sub == "track") return cmd_track(opt);
        if (sub == "flops") return cmd_flops(opt);
        if (sub == "report") return cmd_report(opt);
        std::cerr << "config error: no subcommand\n";
        return 2;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const UnknownPredictor& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const MissingModel& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
}
