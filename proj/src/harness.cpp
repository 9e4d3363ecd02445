#include "ddce/harness.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include "ddce/errors.hpp"
#include "ddce/rng.hpp"

namespace ddce {

std::vector<DopplerScenario> standard_scenarios() {
    return {{"pedestrians", {0.0, 0.001}}, {"cars", {0.001, 0.03}}, {"trains", {0.03, 0.1}}};
}

DopplerScenario scenario_by_name(const std::string& name) {
    for (const DopplerScenario& s : standard_scenarios())
        if (s.name == name) return s;
    throw ConfigError("unknown scenario: " + name);
}

PredictorChoice PredictorChoice::parse(const std::string& name) {
    PredictorChoice c;
    if (name == "genie") {
        c.genie = true;
        return c;
    }
    c.kind = predictor_by_name(name);
    return c;
}

namespace {

double snr_db_to_sigma_w2(double snr_db) { return std::pow(10.0, -snr_db / 10.0); }

struct PointTally {
    std::atomic<long long> bits{0};
    std::atomic<long long> errors{0};
};

// One Monte Carlo point: `trials` packets, Doppler drawn per packet from the
// scenario range. The drawn rate is what baselines receive as the exact
// value; the neural path only sees the range.
void run_point(const ExperimentConfig& cfg, const DopplerScenario& scenario, double snr_db,
               const PredictorChoice& predictor, uint64_t point_seed, PointTally& tally) {
    const int workers = std::max(cfg.workers, 1);
    std::atomic<long> next_trial{0};

    auto worker = [&]() {
        PipelineConfig pipe;
        pipe.code = cfg.code;
        pipe.constellation = cfg.constellation;
        pipe.predictor = predictor.genie ? PredictorKind::ConstantChannel : predictor.kind;
        pipe.genie_csi = predictor.genie;
        pipe.decoder = cfg.decoder;
        pipe.n_r = cfg.n_r;
        pipe.n_p = cfg.n_p;
        pipe.n_b = cfg.n_b;
        pipe.rho_range = scenario.range;
        pipe.channel = cfg.channel;
        pipe.sigma_w2 = snr_db_to_sigma_w2(snr_db);
        pipe.model = cfg.model;

        const size_t n_bits =
            static_cast<size_t>(cfg.n_b) * cfg.code.n_s * cfg.constellation.bits_per_symbol;
        long long local_bits = 0, local_errors = 0;

        for (;;) {
            const long trial = next_trial.fetch_add(1);
            if (trial >= cfg.trials) break;
            const uint64_t trial_seed = point_seed ^ static_cast<uint64_t>(trial);

            std::mt19937_64 rho_rng(mix_seed(trial_seed, 0x72686Full));
            const double rho = scenario.range.rho_min +
                               uniform01(rho_rng) * (scenario.range.rho_max - scenario.range.rho_min);
            pipe.rho_true = rho;
            pipe.seed = mix_seed(trial_seed, 0x706B74ull);

            const ChannelTrace trace = generate_trace(cfg.channel.at_rho(rho), cfg.code.n_t, cfg.n_r,
                                                      pipe.packet_length(), mix_seed(trial_seed, 0x7472ull));
            const std::vector<uint8_t> bits = random_bits(n_bits, mix_seed(trial_seed, 0x6269ull));
            const PacketResult res = run_packet(pipe, trace, bits);
            local_bits += static_cast<long long>(res.decoded_bits.size());
            local_errors += res.bit_errors;
        }
        tally.bits.fetch_add(local_bits);
        tally.errors.fetch_add(local_errors);
    };

    if (workers == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (int i = 0; i < workers; ++i) pool.emplace_back(worker);
        for (std::thread& t : pool) t.join();
    }
}

} // namespace

CalibrationResult run_calibration(uint64_t seed, long long min_bits) {
    PipelineConfig pipe;
    pipe.code = StbcCode::spatial_mux(1);
    pipe.constellation = Constellation::qam(4);
    pipe.genie_csi = true;
    pipe.decoder = DecoderKind::MlGaussian;
    pipe.n_r = 1;
    pipe.n_p = 10;
    pipe.n_b = 45;
    pipe.sigma_w2 = snr_db_to_sigma_w2(10.0);

    const size_t bits_per_packet = static_cast<size_t>(pipe.n_b) * pipe.code.n_s * 2;
    const long packets = static_cast<long>((min_bits + bits_per_packet - 1) / bits_per_packet);
    const ChannelTrace trace = unit_trace(1, 1, pipe.packet_length());

    long long bits = 0, errors = 0;
    for (long trial = 0; trial < packets; ++trial) {
        const uint64_t trial_seed = mix_seed(seed, 0x63616Cull) ^ static_cast<uint64_t>(trial);
        pipe.seed = mix_seed(trial_seed, 0x706B74ull);
        const std::vector<uint8_t> b = random_bits(bits_per_packet, mix_seed(trial_seed, 0x6269ull));
        const PacketResult res = run_packet(pipe, trace, b);
        bits += static_cast<long long>(res.decoded_bits.size());
        errors += res.bit_errors;
    }

    CalibrationResult out;
    out.bits = bits;
    out.ber = bits > 0 ? static_cast<double>(errors) / bits : 1.0;
    out.expected = 0.5 * std::erfc(std::sqrt(10.0) / std::sqrt(2.0)); // Q(sqrt(10))
    out.pass = out.ber > 0.8 * out.expected && out.ber < 1.2 * out.expected;
    return out;
}

std::vector<BerRecord> run_ber_sweep(const ExperimentConfig& cfg) {
    if (cfg.scenarios.empty() || cfg.predictors.empty() || cfg.snr_db.empty())
        throw ConfigError("sweep: scenarios, predictors and snr_db must be nonempty");
    for (const DopplerScenario& s : cfg.scenarios) s.range.validate();
    for (const PredictorChoice& p : cfg.predictors)
        if (!p.genie && p.kind == PredictorKind::DlDd && cfg.model == nullptr)
            throw MissingModel("sweep: dl-dd predictor requires model_path");

    if (cfg.calibrate) {
        const CalibrationResult cal = run_calibration(mix_seed(cfg.base_seed, 0x67617465ull));
        if (!cal.pass) {
            std::ostringstream msg;
            msg << "calibration gate failed: ber " << cal.ber << " vs expected " << cal.expected;
            throw ConfigError(msg.str());
        }
    }

    std::vector<BerRecord> records;
    for (size_t si = 0; si < cfg.scenarios.size(); ++si) {
        for (size_t qi = 0; qi < cfg.snr_db.size(); ++qi) {
            for (size_t pi = 0; pi < cfg.predictors.size(); ++pi) {
                const auto t_start = std::chrono::steady_clock::now();
                PointTally tally;
                const uint64_t point_seed = mix_seed(cfg.base_seed, si, qi, pi);
                run_point(cfg, cfg.scenarios[si], cfg.snr_db[qi], cfg.predictors[pi], point_seed, tally);

                BerRecord rec;
                rec.scenario = cfg.scenarios[si].name;
                rec.snr_db = cfg.snr_db[qi];
                rec.predictor = cfg.predictors[pi].label();
                rec.code = to_string(cfg.code.name);
                rec.trials = cfg.trials;
                rec.total_bits = tally.bits.load();
                rec.bit_errors = tally.errors.load();
                rec.ber = rec.total_bits > 0 ? static_cast<double>(rec.bit_errors) / rec.total_bits : 0.0;
                rec.wall_time_s =
                    std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
                records.push_back(std::move(rec));
            }
        }
    }
    return records;
}

std::vector<PacketLengthRecord> run_packet_length_sweep(const ExperimentConfig& cfg,
                                                        const std::vector<int>& n_b_list) {
    std::vector<PacketLengthRecord> records;
    for (int n_b : n_b_list) {
        if (n_b <= 0) {
            std::cerr << "packet-length sweep: skipping n_b=" << n_b << " (pilot-only packet, no data)\n";
            continue;
        }
        ExperimentConfig point = cfg;
        point.n_b = n_b;
        point.calibrate = false;
        const std::vector<BerRecord> recs = run_ber_sweep(point);
        for (const BerRecord& r : recs) {
            PacketLengthRecord plr;
            plr.n_b = n_b;
            plr.packet_len = n_b * cfg.code.n_x + cfg.n_p;
            plr.r = static_cast<double>(cfg.n_p) / plr.packet_len;
            plr.ber = r;
            records.push_back(std::move(plr));
        }
    }
    return records;
}

namespace {

std::string format_record(const BerRecord& r) {
    char buf[256];
    std::snprintf(buf, sizeof buf, "%s,%.6g,%s,%s,%ld,%lld,%lld,%.10e,%.3f", r.scenario.c_str(), r.snr_db,
                  r.predictor.c_str(), r.code.c_str(), r.trials, r.total_bits, r.bit_errors, r.ber,
                  r.wall_time_s);
    return buf;
}

} // namespace

void write_ber_csv(const std::vector<BerRecord>& records, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot open output: " + path);
    out << "scenario,snr_db,predictor,code,trials,total_bits,bit_errors,ber,wall_time_s\n";
    for (const BerRecord& r : records) out << format_record(r) << "\n";
}

std::vector<BerRecord> read_ber_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open input: " + path);
    std::string line;
    if (!std::getline(in, line)) throw ConfigError("empty csv: " + path);
    std::vector<BerRecord> records;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream row(line);
        std::string field;
        BerRecord r;
        auto next = [&]() {
            if (!std::getline(row, field, ',')) throw ConfigError("malformed csv row: " + line);
            return field;
        };
        r.scenario = next();
        r.snr_db = std::stod(next());
        r.predictor = next();
        r.code = next();
        r.trials = std::stol(next());
        r.total_bits = std::stoll(next());
        r.bit_errors = std::stoll(next());
        r.ber = std::stod(next());
        r.wall_time_s = std::stod(next());
        records.push_back(std::move(r));
    }
    return records;
}

void write_packet_length_csv(const std::vector<PacketLengthRecord>& records, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot open output: " + path);
    out << "r,L,n_b,scenario,snr_db,predictor,code,trials,total_bits,bit_errors,ber,wall_time_s\n";
    char buf[64];
    for (const PacketLengthRecord& p : records) {
        std::snprintf(buf, sizeof buf, "%.6g,%d,%d,", p.r, p.packet_len, p.n_b);
        out << buf << format_record(p.ber) << "\n";
    }
}

void write_report_csv(const std::vector<BerRecord>& records, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot open output: " + path);
    out << "scenario,snr_db,predictor,code,trials,total_bits,bit_errors,ber,ber_std,ci95_lo,ci95_hi\n";
    char buf[160];
    for (const BerRecord& r : records) {
        const double n = static_cast<double>(std::max<long long>(r.total_bits, 1));
        const double std_dev = std::sqrt(std::max(r.ber * (1.0 - r.ber), 0.0) / n);
        std::snprintf(buf, sizeof buf, "%s,%.6g,%s,%s,%ld,%lld,%lld,%.10e,%.10e,%.10e,%.10e\n",
                      r.scenario.c_str(), r.snr_db, r.predictor.c_str(), r.code.c_str(), r.trials,
                      r.total_bits, r.bit_errors, r.ber, std_dev, std::max(r.ber - 1.96 * std_dev, 0.0),
                      r.ber + 1.96 * std_dev);
        out << buf;
    }
}

void write_manifest(const std::string& out_path, const std::vector<std::string>& config_lines,
                    uint64_t base_seed) {
    std::ofstream out(out_path + ".manifest");
    if (!out) return;
    out << "base_seed = " << base_seed << "\n";
    std::string describe = "unknown";
    if (FILE* pipe = popen("git describe --always --dirty 2>/dev/null", "r")) {
        char buf[128];
        if (fgets(buf, sizeof buf, pipe)) {
            describe.assign(buf);
            while (!describe.empty() && (describe.back() == '\n' || describe.back() == '\r'))
                describe.pop_back();
        }
        pclose(pipe);
    }
    out << "git = " << (describe.empty() ? "unknown" : describe) << "\n";
    for (const std::string& line : config_lines) out << line << "\n";
}

long long flops(const std::string& predictor, const FlopParams& p) {
    const long long nt = p.n_t, nr = p.n_r, nx = p.n_x, np = p.n_p;
    if (nt < 1 || nr < 1 || nx < 1 || np < 1) throw ConfigError("flops: parameters must be >= 1");
    if (predictor == "wiener-np") {
        const long long g = (np - 1) * (np - 1) * (6 * nt - 2) + (np - 1);
        return nr * nx *
               (g + 3 * g * g * g + 5 * g * g + 4 * (np - 1) * nt + 6 * nt * (np - 1) * (np - 1) * (np - 1) +
                4 * nt * (np - 1) * (np - 1) - 2 * nt * (np - 1));
    }
    if (predictor == "dd-cc")
        return np * (3 * np + 2 * np * nt - 2 * nr * nt + 4 * np * nt * nt + 6 * np * np * nt +
                     3 * np * np + 6 * np * nr * nt + 1);
    if (predictor == "dd-ar1")
        return np * (3 * np + 2 * np * nt - 2 * nr * nt + 4 * np * nt * nt + 6 * np * np * nt +
                     3 * np * np + 6 * np * nr * nx + nr * nt * nt + 1);
    if (predictor == "dl-dd")
        return np * (3 * np + 2 * np * nt - 2 * nr * nt + 4 * np * nt * nt + 6 * np * np * nt +
                     3 * np * np + 6 * np * nr * np + 1) +
               512 * (nt * nr * (nx + np) + 128);
    throw UnknownPredictor("flops: unknown predictor '" + predictor + "'");
}

void run_tracking(const TrackingConfig& cfg, const std::string& out_path) {
    PipelineConfig pipe;
    pipe.code = cfg.code;
    pipe.constellation = cfg.constellation;
    pipe.predictor = cfg.predictor.genie ? PredictorKind::ConstantChannel : cfg.predictor.kind;
    pipe.genie_csi = cfg.predictor.genie;
    pipe.decoder = cfg.decoder;
    pipe.n_r = cfg.n_r;
    pipe.n_p = cfg.n_p;
    pipe.n_b = cfg.n_b;
    pipe.rho_range = cfg.rho_range;
    pipe.rho_true = cfg.rho;
    pipe.channel = cfg.channel;
    pipe.sigma_w2 = snr_db_to_sigma_w2(cfg.snr_db);
    pipe.seed = mix_seed(cfg.seed, 0x706B74ull);
    pipe.model = cfg.model;

    const ChannelTrace trace = generate_trace(cfg.channel.at_rho(cfg.rho), cfg.code.n_t, cfg.n_r,
                                              pipe.packet_length(), mix_seed(cfg.seed, 0x7472ull));
    const size_t n_bits = static_cast<size_t>(cfg.n_b) * cfg.code.n_s * cfg.constellation.bits_per_symbol;
    const std::vector<uint8_t> bits = random_bits(n_bits, mix_seed(cfg.seed, 0x6269ull));
    const PacketResult res = run_packet(pipe, trace, bits);
    export_tracking_csv(res, trace, out_path);
}

} // namespace ddce
