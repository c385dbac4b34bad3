// sbridge CLI: schedule dumps, bridge/baseline sampling, loss reports, rank
// analysis and toy experiments. Exit codes: 0 ok, 2 validation error,
// 3 runtime error (I/O, non-finite states).

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "sbridge/baselines.hpp"
#include "sbridge/bridge.hpp"
#include "sbridge/dsp.hpp"
#include "sbridge/losses.hpp"
#include "sbridge/rank.hpp"
#include "sbridge/rng.hpp"
#include "sbridge/schedule.hpp"
#include "sbridge/state.hpp"
#include "sbridge/toy.hpp"
#include "sbridge/wav.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace sbridge;

namespace {

constexpr int kExitValidation = 2;
constexpr int kExitRuntime = 3;

std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

void write_text(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << content;
    if (!out) throw std::runtime_error("write failed: " + path);
}

// ---------------------------------------------------------------- schedule

struct ScheduleFlags {
    std::string kind = "gmax";
    double beta0 = 0.01;
    double beta1 = 20.0;
    std::optional<double> c;
    double k = 2.6;

    ScheduleParams build() const {
        ScheduleParams p;
        p.kind = schedule_kind_from_string(kind);
        p.beta0 = beta0;
        p.beta1 = beta1;
        p.k = k;
        p.c = c.value_or(p.kind == ScheduleKind::ScaledVp ? 0.30 : 0.40);
        p.validate();
        return p;
    }
};

void add_schedule_flags(CLI::App* cmd, ScheduleFlags& flags) {
    cmd->add_option("--kind", flags.kind, "schedule kind: gmax | scaled-vp | ve")
        ->default_val("gmax");
    cmd->add_option("--beta0", flags.beta0, "beta_0 (gmax, scaled-vp)");
    cmd->add_option("--beta1", flags.beta1, "beta_1 (gmax, scaled-vp)");
    double* c_slot = new double(0.0);  // optional flag, see build()
    cmd->add_option_function<double>(
        "--c", [&flags](double v) { flags.c = v; },
        "diffusion scale c (scaled-vp default 0.30, ve default 0.40)");
    (void)c_slot;
    cmd->add_option("--k", flags.k, "exponential base k (ve)");
}

int cmd_schedule(const ScheduleFlags& sched, std::size_t steps, const std::string& out) {
    const ScheduleParams params = sched.build();
    if (steps < 2) throw std::invalid_argument("schedule: --steps must be >= 2");

    std::ostringstream csv;
    csv << "t,f,g2,alpha,alpha_bar,sigma2,sigma_bar2\n";
    for (std::size_t i = 0; i < steps; ++i) {
        const double t = static_cast<double>(i) / static_cast<double>(steps - 1);
        const ScheduleValues v = evaluate(params, t);
        csv << fmt_double(t) << ',' << fmt_double(v.f) << ',' << fmt_double(v.g2) << ','
            << fmt_double(v.alpha) << ',' << fmt_double(v.alpha_bar) << ','
            << fmt_double(v.sigma2) << ',' << fmt_double(v.sigma_bar2) << '\n';
    }
    if (out.empty()) {
        std::cout << csv.str();
    } else {
        write_text(out, csv.str());
        json summary = {{"schema", 1},
                        {"command", "schedule"},
                        {"kind", to_string(params.kind)},
                        {"rows", steps},
                        {"output", out}};
        std::cout << summary.dump() << '\n';
    }
    return 0;
}

// ------------------------------------------------------------------ sample

struct StateIo {
    StateVector state;
    // set when the state came from a waveform
    std::optional<Waveform> source_wave;
    StftConfig stft_config;
};

bool has_suffix(const std::string& s, const std::string& suffix) {
    return s.size() >= suffix.size() &&
           s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

std::vector<double> read_csv_column(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::vector<double> values;
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (first) {
            first = false;
            // header row is optional
            try {
                values.push_back(std::stod(line));
            } catch (const std::exception&) {
            }
            continue;
        }
        values.push_back(std::stod(line));
    }
    if (values.empty()) throw std::runtime_error("no values in " + path);
    return values;
}

StateIo load_state(const std::string& path, const StftConfig& cfg, int expect_rate) {
    StateIo io;
    io.stft_config = cfg;
    if (has_suffix(path, ".wav")) {
        Waveform w = read_wav(path);
        if (expect_rate > 0 && w.sample_rate != expect_rate)
            throw std::runtime_error("sample-rate mismatch: " + path + " has " +
                                     std::to_string(w.sample_rate) + ", expected " +
                                     std::to_string(expect_rate));
        const ComplexSpectrogram spec = stft(w, cfg);
        io.state = StateVector::complex_grid(spec.data, spec.frames, spec.bins);
        io.source_wave = std::move(w);
    } else {
        io.state = StateVector::real(read_csv_column(path));
    }
    return io;
}

void store_state(const std::string& path, const StateVector& state, const StateIo& input) {
    if (has_suffix(path, ".wav")) {
        if (!input.source_wave)
            throw std::invalid_argument("cannot write WAV from a CSV state input");
        ComplexSpectrogram spec;
        spec.frames = state.frames();
        spec.bins = state.bins();
        spec.data = state.values();
        const Waveform out = istft(spec, input.stft_config, input.source_wave->samples.size(),
                                   input.source_wave->sample_rate);
        write_wav(path, out, WavEncoding::Float32);
    } else {
        std::ostringstream csv;
        csv << "value\n";
        for (std::size_t i = 0; i < state.size(); ++i)
            csv << fmt_double(state[i].real()) << '\n';
        write_text(path, csv.str());
    }
}

struct ToyFlags {
    double mu0 = 1.0, s0 = 1.0, a = 0.8, b = 0.2, sn = 0.5;

    ToyModel build() const {
        ToyModel t{mu0, s0, a, b, sn};
        t.validate();
        return t;
    }
};

void add_toy_flags(CLI::App* cmd, ToyFlags& flags) {
    cmd->add_option("--toy-mu0", flags.mu0, "toy model: mean of x0");
    cmd->add_option("--toy-s0", flags.s0, "toy model: std of x0");
    cmd->add_option("--toy-a", flags.a, "toy model: mixing gain");
    cmd->add_option("--toy-b", flags.b, "toy model: offset");
    cmd->add_option("--toy-sn", flags.sn, "toy model: corruption noise std");
}

struct OuveFlags {
    double gamma = 1.5, sigma_min = 0.05, sigma_max = 0.5, snr = 0.5;
    std::size_t n_corrector = 1;

    OuveParams build(double t_min) const {
        OuveParams p;
        p.gamma = gamma;
        p.sigma_min = sigma_min;
        p.sigma_max = sigma_max;
        p.corrector_snr = snr;
        p.n_corrector = n_corrector;
        p.t_min = t_min;
        p.validate();
        return p;
    }
};

void add_ouve_flags(CLI::App* cmd, OuveFlags& flags) {
    cmd->add_option("--ouve-gamma", flags.gamma, "OUVE stiffness");
    cmd->add_option("--ouve-sigma-min", flags.sigma_min, "OUVE sigma_min");
    cmd->add_option("--ouve-sigma-max", flags.sigma_max, "OUVE sigma_max");
    cmd->add_option("--ouve-snr", flags.snr, "corrector snr");
    cmd->add_option("--ouve-correctors", flags.n_corrector, "corrector steps per predictor step");
}

Denoiser build_denoiser(const std::string& spec_string, const ToyFlags& toy_flags,
                        const ScheduleParams& schedule, const StftConfig& cfg,
                        int expect_rate) {
    if (spec_string == "identity")
        return [](const StateVector& xt, const StateVector&, double) { return xt; };
    if (spec_string.rfind("constant:", 0) == 0) {
        const double value = std::stod(spec_string.substr(9));
        return [value](const StateVector& xt, const StateVector&, double) {
            StateVector out = xt;
            for (std::size_t i = 0; i < out.size(); ++i) out[i] = value;
            return out;
        };
    }
    if (spec_string == "toy-oracle")
        return make_toy_exact_denoiser(toy_flags.build(), schedule);
    if (spec_string.rfind("file:", 0) == 0) {
        const std::string path = spec_string.substr(5);
        auto fixed = std::make_shared<StateIo>(load_state(path, cfg, expect_rate));
        return [fixed](const StateVector& xt, const StateVector&, double) {
            if (!fixed->state.same_shape(xt))
                throw std::runtime_error("file-backed denoiser: state shape mismatch");
            return fixed->state;
        };
    }
    throw std::invalid_argument("unknown denoiser: " + spec_string +
                                " (want identity | constant:V | toy-oracle | file:PATH)");
}

int cmd_sample(const std::string& sampler, const ScheduleFlags& sched_flags,
               const ToyFlags& toy_flags, const OuveFlags& ouve_flags,
               const std::string& denoiser_spec, std::size_t n_steps, double t_min,
               std::uint64_t seed, const std::string& input, const std::string& output,
               std::size_t n_fft, std::size_t hop, int expect_rate) {
    const ScheduleParams schedule = sched_flags.build();
    StftConfig cfg;
    cfg.n_fft = n_fft;
    cfg.hop = hop;
    cfg.validate();

    const StateIo in = load_state(input, cfg, expect_rate);
    const Denoiser denoiser =
        build_denoiser(denoiser_spec, toy_flags, schedule, cfg, expect_rate);

    SamplerConfig sampler_cfg;
    sampler_cfg.schedule = schedule;
    sampler_cfg.n_steps = n_steps;
    sampler_cfg.t_min = t_min;
    sampler_cfg.seed = seed;
    sampler_cfg.validate();

    RngStream rng(seed, 0);
    const auto t0 = std::chrono::steady_clock::now();
    StateVector result;
    if (sampler == "sb-sde") {
        result = sample_sde(sampler_cfg, denoiser, in.state, rng);
    } else if (sampler == "sb-ode") {
        result = sample_ode(sampler_cfg, denoiser, in.state);
    } else if (sampler == "sgm") {
        const OuveParams ouve = ouve_flags.build(t_min);
        const StateVector& y = in.state;
        const ScoreFn score = [&](const StateVector& x, double t) {
            const StateVector x0_hat = denoiser(x, y, t);
            const double w = ouve.kernel_mean_weight(t);
            const double var = ouve.kernel_variance(t);
            StateVector s = x;
            for (std::size_t i = 0; i < s.size(); ++i) {
                const auto mean = w * x0_hat[i] + (1.0 - w) * y[i];
                s[i] = -(x[i] - mean) / var;
            }
            return s;
        };
        result = sgm_sample(ouve, score, in.state, n_steps, rng);
    } else if (sampler == "rfm" || sampler == "otfm") {
        const StateVector& x1 = in.state;
        const VelocityFn velocity = [&](double t, const StateVector& x) {
            const StateVector x0_hat = denoiser(x, x1, t);
            StateVector v = x;
            for (std::size_t i = 0; i < v.size(); ++i) v[i] = (x0_hat[i] - x[i]) / t;
            return v;
        };
        result = flow_euler_sample(velocity, in.state, n_steps);
    } else {
        throw std::invalid_argument("unknown sampler: " + sampler +
                                    " (want sb-sde | sb-ode | sgm | rfm | otfm)");
    }
    const auto t1 = std::chrono::steady_clock::now();
    if (!result.all_finite()) throw std::runtime_error("sample: non-finite output state");

    store_state(output, result, in);

    json summary = {{"schema", 1},
                    {"command", "sample"},
                    {"sampler", sampler},
                    {"n_steps", n_steps},
                    {"seed", seed},
                    {"t_min", t_min},
                    {"denoiser", denoiser_spec},
                    {"input", input},
                    {"output", output},
                    {"wall_time_s", std::chrono::duration<double>(t1 - t0).count()}};
    if (in.state.is_complex()) {
        summary["state"] = {{"kind", "spectrogram"},
                            {"frames", in.state.frames()},
                            {"bins", in.state.bins()}};
    } else {
        summary["state"] = {{"kind", "vector"}, {"length", in.state.size()}};
    }
    std::cout << summary.dump() << '\n';
    return 0;
}

// -------------------------------------------------------------------- loss

int cmd_loss(const std::string& ref_path, const std::string& est_path, std::size_t n_fft,
             std::size_t hop, std::size_t n_mels, const LossWeights& weights,
             int expect_rate, const std::string& out) {
    const Waveform ref = read_wav(ref_path);
    const Waveform est = read_wav(est_path);
    if (ref.sample_rate != est.sample_rate)
        throw std::runtime_error("sample-rate mismatch between inputs");
    if (expect_rate > 0 && ref.sample_rate != expect_rate)
        throw std::runtime_error("sample-rate mismatch: expected " +
                                 std::to_string(expect_rate));
    if (ref.samples.size() != est.samples.size())
        throw std::runtime_error("input lengths differ");

    StftConfig cfg;
    cfg.n_fft = n_fft;
    cfg.hop = hop;
    cfg.validate();

    const ComplexSpectrogram ref_spec = stft(ref, cfg);
    const ComplexSpectrogram est_spec = stft(est, cfg);
    const MelFilterbank fb = mel_filterbank(ref.sample_rate, n_fft, n_mels);
    const MultiMelConfig mm;

    const double mse = mse_loss(est_spec, ref_spec);
    const double mel = mel_loss(est_spec, ref_spec, fb);
    const double mmel = multi_mel_loss(est, ref, mm, ref.sample_rate);
    const PhaseLoss ph = phase_loss(phase(est_spec), phase(ref_spec));

    auto mpd = mpd_energy_scorers();
    auto mrsd = mrsd_feature_scorers();
    std::vector<Scorer> scorers;
    scorers.insert(scorers.end(), mpd.begin(), mpd.end());
    scorers.insert(scorers.end(), mrsd.begin(), mrsd.end());

    const auto fake_scores = score_all(scorers, est);
    const auto real_scores = score_all(scorers, ref);
    const double g = hinge_g_loss(fake_scores);
    const double d = hinge_d_loss(real_scores, fake_scores);
    const double fm = feature_matching_loss(features_all(scorers, est),
                                            features_all(scorers, ref));

    LossComponents comp;
    comp.mse = mse;
    comp.mel = mmel;  // the weighted total uses the multi-scale mel term
    comp.phase = ph.total;
    comp.hinge_g = g;
    comp.feature_matching = fm;
    const double total = generator_loss(comp, weights);

    json report = {{"schema", 1},
                   {"command", "loss"},
                   {"sample_rate", ref.sample_rate},
                   {"n_fft", n_fft},
                   {"hop", hop},
                   {"mse", mse},
                   {"mel", mel},
                   {"multi_mel", mmel},
                   {"phase", {{"total", ph.total}, {"ip", ph.ip}, {"gd", ph.gd}, {"if", ph.if_}}},
                   {"hinge", {{"g", g}, {"d", d}}},
                   {"feature_matching", fm},
                   {"weights",
                    {{"lambda_mel", weights.lambda_mel},
                     {"lambda_p", weights.lambda_p},
                     {"lambda_g", weights.lambda_g},
                     {"lambda_fm", weights.lambda_fm}}},
                   {"generator_total", total}};
    const std::string text = report.dump(2) + "\n";
    if (out.empty()) {
        std::cout << text;
    } else {
        write_text(out, text);
        std::cout << json({{"schema", 1}, {"command", "loss"}, {"output", out}}).dump() << '\n';
    }
    return 0;
}

// -------------------------------------------------------------------- rank

std::vector<std::string> gather_wavs(const std::string& dir, const std::string& files) {
    std::vector<std::string> paths;
    if (!dir.empty()) {
        for (const auto& entry : fs::directory_iterator(dir))
            if (entry.is_regular_file() && entry.path().extension() == ".wav")
                paths.push_back(entry.path().string());
        std::sort(paths.begin(), paths.end());
    }
    if (!files.empty()) {
        std::stringstream ss(files);
        std::string item;
        while (std::getline(ss, item, ','))
            if (!item.empty()) paths.push_back(item);
    }
    if (paths.empty()) throw std::invalid_argument("rank: no input files");
    return paths;
}

int cmd_rank(const std::string& dir, const std::string& files, const std::string& ref_dir,
             const std::string& ref_files, double eta, std::size_t n_fft, std::size_t hop,
             int expect_rate, const std::string& out_csv, const std::string& out_json) {
    RankConfig cfg;
    cfg.eta = eta;
    cfg.n_fft = n_fft;
    cfg.hop = hop;
    cfg.validate();

    const std::vector<std::string> method_paths = gather_wavs(dir, files);
    std::vector<Waveform> method_waves;
    for (const auto& p : method_paths) {
        Waveform w = read_wav(p);
        if (expect_rate > 0 && w.sample_rate != expect_rate)
            throw std::runtime_error("sample-rate mismatch: " + p);
        method_waves.push_back(std::move(w));
    }

    std::ostringstream csv;
    csv << "file,rank\n";
    std::vector<int> ranks;
    for (std::size_t i = 0; i < method_waves.size(); ++i) {
        ranks.push_back(rank_of_wave(method_waves[i], cfg));
        csv << method_paths[i] << ',' << ranks.back() << '\n';
    }
    if (out_csv.empty()) {
        std::cout << csv.str();
    } else {
        write_text(out_csv, csv.str());
    }

    json summary = {{"schema", 1}, {"command", "rank"}, {"count", method_paths.size()},
                    {"eta", eta}};
    if (!ref_dir.empty() || !ref_files.empty()) {
        const std::vector<std::string> ref_paths = gather_wavs(ref_dir, ref_files);
        std::vector<Waveform> ref_waves;
        for (const auto& p : ref_paths) {
            Waveform w = read_wav(p);
            if (expect_rate > 0 && w.sample_rate != expect_rate)
                throw std::runtime_error("sample-rate mismatch: " + p);
            ref_waves.push_back(std::move(w));
        }
        const RankReport report = rank_diff_stats(method_waves, ref_waves, cfg);
        summary["diff"] = {{"mean", report.mean},
                           {"median", report.median},
                           {"variance", report.variance}};
    }
    const std::string text = summary.dump(2) + "\n";
    if (out_json.empty()) {
        if (!out_csv.empty()) std::cout << text;
    } else {
        write_text(out_json, text);
    }
    return 0;
}

// --------------------------------------------------------------------- toy

int cmd_toy_convergence(const ToyFlags& toy_flags, const ScheduleFlags& sched_flags,
                        const OuveFlags& ouve_flags, const std::string& families_csv,
                        const std::string& steps_csv, std::size_t trajectories,
                        std::size_t dim, double x1_value, double t_min, std::uint64_t seed,
                        const std::string& out) {
    ConvergenceConfig cfg;
    cfg.toy = toy_flags.build();
    cfg.schedule = sched_flags.build();
    cfg.ouve = ouve_flags.build(t_min);
    cfg.n_trajectories = trajectories;
    cfg.dim = dim;
    cfg.x1_value = x1_value;
    cfg.t_min = t_min;
    cfg.seed = seed;

    cfg.families.clear();
    {
        std::stringstream ss(families_csv);
        std::string item;
        while (std::getline(ss, item, ','))
            if (!item.empty()) cfg.families.push_back(toy_family_from_string(item));
    }
    cfg.steps_list.clear();
    {
        std::stringstream ss(steps_csv);
        std::string item;
        while (std::getline(ss, item, ','))
            if (!item.empty()) cfg.steps_list.push_back(std::stoul(item));
    }
    if (cfg.families.empty() || cfg.steps_list.empty())
        throw std::invalid_argument("toy: empty families or steps list");

    const auto rows = convergence_experiment(cfg);
    std::ostringstream csv;
    csv << "family,n_steps,mean_err,var_err,w2,se_mean,wall_ms\n";
    for (const auto& r : rows)
        csv << to_string(r.family) << ',' << r.n_steps << ',' << fmt_double(r.mean_err)
            << ',' << fmt_double(r.var_err) << ',' << fmt_double(r.w2) << ','
            << fmt_double(r.se_mean) << ',' << fmt_double(r.wall_ms) << '\n';
    if (out.empty()) {
        std::cout << csv.str();
    } else {
        write_text(out, csv.str());
        std::cout << json({{"schema", 1},
                           {"command", "toy"},
                           {"experiment", "convergence"},
                           {"rows", rows.size()},
                           {"output", out}})
                         .dump()
                  << '\n';
    }
    return 0;
}

int cmd_toy_train(const ToyFlags& toy_flags, const ScheduleFlags& sched_flags,
                  std::size_t steps, std::size_t batch_size, double lr,
                  std::size_t n_buckets, std::size_t dim, double t_min,
                  std::uint64_t seed, const std::string& out) {
    const ToyModel toy = toy_flags.build();
    const ScheduleParams schedule = sched_flags.build();
    LinearDenoiser denoiser(n_buckets, t_min);
    RngStream rng(seed, 0);

    std::ostringstream csv;
    csv << "step,mse,hinge_g,hinge_d\n";
    for (std::size_t s = 0; s < steps; ++s) {
        std::vector<std::pair<StateVector, StateVector>> batch;
        batch.reserve(batch_size);
        for (std::size_t i = 0; i < batch_size; ++i) batch.push_back(toy.sample_pair(dim, rng));
        const TrainStepRecord rec = training_step(schedule, denoiser, batch, rng, lr);
        if (s % 50 == 0 || s + 1 == steps)
            csv << s << ',' << fmt_double(rec.mse) << ',' << fmt_double(rec.hinge_g) << ','
                << fmt_double(rec.hinge_d) << '\n';
    }

    // per-bucket evaluation against the exact-oracle floor
    json buckets = json::array();
    RngStream eval_rng(seed, 1);
    const double span = (1.0 - t_min) / static_cast<double>(n_buckets);
    for (std::size_t bkt = 0; bkt < n_buckets; ++bkt) {
        const double lo = t_min + span * static_cast<double>(bkt);
        const double hi = lo + span;
        std::vector<TrainSample> samples;
        for (std::size_t i = 0; i < 4000; ++i) {
            auto [x0, x1] = toy.sample_pair(dim, eval_rng);
            TrainSample ts;
            ts.t = eval_rng.uniform(lo, hi);
            ts.x0 = x0;
            ts.x1 = x1;
            ts.xt = perturb(schedule, ts.t, x0, x1, eval_rng);
            samples.push_back(std::move(ts));
        }
        const double mse = batch_mse(denoiser, samples);
        const double floor = bayes_mse_floor(toy, schedule, lo, hi);
        buckets.push_back({{"bucket", bkt},
                           {"mse", mse},
                           {"bayes_floor", floor},
                           {"rel_gap", floor > 0.0 ? (mse - floor) / floor : 0.0}});
    }

    if (!out.empty()) write_text(out, csv.str());
    json summary = {{"schema", 1},
                    {"command", "toy"},
                    {"experiment", "train"},
                    {"steps", steps},
                    {"lr", lr},
                    {"batch", batch_size},
                    {"buckets", buckets}};
    if (!out.empty()) summary["output"] = out;
    std::cout << summary.dump(2) << '\n';
    return 0;
}

int cmd_toy_oracle_check(const ToyFlags& toy_flags, const ScheduleFlags& sched_flags,
                         std::size_t draws, std::uint64_t seed) {
    const double residual =
        oracle_check_max_residual(toy_flags.build(), sched_flags.build(), draws, seed);
    json summary = {{"schema", 1},
                    {"command", "toy"},
                    {"experiment", "oracle-check"},
                    {"draws", draws},
                    {"max_residual", residual}};
    std::cout << summary.dump() << '\n';
    return 0;
}

// ------------------------------------------------------------ config file

// JSON config: { "<subcommand>": { "<long-flag>": value, ... }, ... }
// Values from the file override command-line flags; unknown keys are
// rejected. Default path comes from SBRIDGE_CONFIG when --config is absent.
std::vector<std::string> config_tokens(const std::string& path, CLI::App& app,
                                       const std::string& subcommand) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config " + path);
    json cfg;
    in >> cfg;
    if (!cfg.is_object()) throw std::invalid_argument("config: top level must be an object");

    std::vector<std::string> tokens;
    for (const auto& [section, values] : cfg.items()) {
        CLI::App* cmd = app.get_subcommand_no_throw(section);
        if (cmd == nullptr)
            throw std::invalid_argument("config: unknown subcommand key '" + section + "'");
        if (section != subcommand) continue;
        if (!values.is_object())
            throw std::invalid_argument("config: section '" + section + "' must be an object");
        for (const auto& [key, value] : values.items()) {
            const std::string flag = "--" + key;
            if (cmd->get_option_no_throw(flag) == nullptr)
                throw std::invalid_argument("config: unknown key '" + key + "' in '" +
                                            section + "'");
            std::string text;
            if (value.is_string())
                text = value.get<std::string>();
            else if (value.is_boolean())
                text = value.get<bool>() ? "true" : "false";
            else if (value.is_number_integer())
                text = std::to_string(value.get<long long>());
            else if (value.is_number())
                text = fmt_double(value.get<double>());
            else
                throw std::invalid_argument("config: unsupported value type for '" + key + "'");
            tokens.push_back(flag + "=" + text);
        }
    }
    return tokens;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Schrödinger-bridge sampling toolkit"};
    app.require_subcommand(1);
    app.option_defaults()->always_capture_default();

    std::string config_path;
    app.add_option("--config", config_path,
                   "JSON config file; values override flags (env SBRIDGE_CONFIG)");

    // schedule
    auto* schedule_cmd = app.add_subcommand("schedule", "dump schedule coefficients as CSV");
    ScheduleFlags sched_sched;
    add_schedule_flags(schedule_cmd, sched_sched);
    std::size_t sched_steps = 11;
    std::string sched_out;
    schedule_cmd->add_option("--steps", sched_steps, "number of grid rows");
    schedule_cmd->add_option("--out", sched_out, "output CSV path (default stdout)");

    // sample
    auto* sample_cmd = app.add_subcommand("sample", "run a sampler on a WAV or CSV state");
    ScheduleFlags sample_sched;
    ToyFlags sample_toy;
    OuveFlags sample_ouve;
    add_schedule_flags(sample_cmd, sample_sched);
    add_toy_flags(sample_cmd, sample_toy);
    add_ouve_flags(sample_cmd, sample_ouve);
    std::string sample_sampler = "sb-sde", sample_denoiser = "identity";
    std::string sample_input, sample_output;
    std::size_t sample_steps = 4, sample_nfft = 1024, sample_hop = 256;
    double sample_tmin = 1e-4;
    std::uint64_t sample_seed = 0;
    int sample_rate_expect = 0;
    sample_cmd->add_option("--sampler", sample_sampler, "sb-sde | sb-ode | sgm | rfm | otfm");
    sample_cmd->add_option("--denoiser", sample_denoiser,
                           "identity | constant:V | toy-oracle | file:PATH");
    sample_cmd->add_option("--steps", sample_steps, "reverse steps N");
    sample_cmd->add_option("--t-min", sample_tmin, "time floor t_min");
    sample_cmd->add_option("--seed", sample_seed, "RNG seed");
    sample_cmd->add_option("--input", sample_input, "input WAV or CSV state")->required();
    sample_cmd->add_option("--output", sample_output, "output WAV or CSV state")->required();
    sample_cmd->add_option("--n-fft", sample_nfft, "STFT size for WAV inputs");
    sample_cmd->add_option("--hop", sample_hop, "STFT hop for WAV inputs");
    sample_cmd->add_option("--sample-rate", sample_rate_expect,
                           "require this input sample rate (0 = accept any)");

    // loss
    auto* loss_cmd = app.add_subcommand("loss", "loss report between two WAV files");
    std::string loss_ref, loss_est, loss_out;
    std::size_t loss_nfft = 1024, loss_hop = 256, loss_nmels = 160;
    LossWeights loss_weights;
    int loss_rate_expect = 0;
    loss_cmd->add_option("--ref", loss_ref, "reference WAV")->required();
    loss_cmd->add_option("--est", loss_est, "estimate WAV")->required();
    loss_cmd->add_option("--n-fft", loss_nfft, "STFT size");
    loss_cmd->add_option("--hop", loss_hop, "STFT hop");
    loss_cmd->add_option("--n-mels", loss_nmels, "mel bins for the single-scale mel loss");
    loss_cmd->add_option("--lambda-mel", loss_weights.lambda_mel, "mel weight");
    loss_cmd->add_option("--lambda-p", loss_weights.lambda_p, "phase weight");
    loss_cmd->add_option("--lambda-g", loss_weights.lambda_g, "adversarial weight");
    loss_cmd->add_option("--lambda-fm", loss_weights.lambda_fm, "feature-matching weight");
    loss_cmd->add_option("--sample-rate", loss_rate_expect,
                         "require this sample rate (0 = accept any)");
    loss_cmd->add_option("--out", loss_out, "write the JSON report here instead of stdout");

    // rank
    auto* rank_cmd = app.add_subcommand("rank", "thresholded-rank analysis of WAV files");
    std::string rank_dir, rank_files, rank_ref_dir, rank_ref_files, rank_out, rank_json;
    double rank_eta = 0.5;
    std::size_t rank_nfft = 512, rank_hop = 256;
    int rank_rate_expect = 0;
    rank_cmd->add_option("--dir", rank_dir, "directory of WAV files");
    rank_cmd->add_option("--files", rank_files, "comma-separated WAV list");
    rank_cmd->add_option("--ref-dir", rank_ref_dir, "reference directory (enables diff stats)");
    rank_cmd->add_option("--ref-files", rank_ref_files, "comma-separated reference list");
    rank_cmd->add_option("--eta", rank_eta, "singular-value threshold");
    rank_cmd->add_option("--n-fft", rank_nfft, "STFT size");
    rank_cmd->add_option("--hop", rank_hop, "STFT hop");
    rank_cmd->add_option("--sample-rate", rank_rate_expect,
                         "require this sample rate (0 = accept any)");
    rank_cmd->add_option("--out", rank_out, "output CSV path (default stdout)");
    rank_cmd->add_option("--json", rank_json, "write the JSON summary here");

    // toy
    auto* toy_cmd = app.add_subcommand("toy", "toy-model experiments");
    ScheduleFlags toy_sched;
    ToyFlags toy_toy;
    OuveFlags toy_ouve;
    add_schedule_flags(toy_cmd, toy_sched);
    add_toy_flags(toy_cmd, toy_toy);
    add_ouve_flags(toy_cmd, toy_ouve);
    std::string toy_experiment = "convergence", toy_out;
    std::string toy_families = "sb-sde,sb-ode,sgm,rfm";
    std::string toy_steps_list = "1,2,4,8,16,32";
    std::size_t toy_traj = 10000, toy_dim = 16, toy_train_steps = 2000, toy_batch = 128;
    std::size_t toy_buckets = 8, toy_draws = 20000, toy_train_dim = 1;
    double toy_x1 = 2.0, toy_tmin = 1e-4, toy_lr = 0.005;
    std::uint64_t toy_seed = 0;
    toy_cmd->add_option("--experiment", toy_experiment, "convergence | train | oracle-check");
    toy_cmd->add_option("--families", toy_families, "comma-separated sampler families");
    toy_cmd->add_option("--steps-list", toy_steps_list, "comma-separated step counts");
    toy_cmd->add_option("--trajectories", toy_traj, "Monte Carlo trajectories");
    toy_cmd->add_option("--dim", toy_dim, "state dimension (convergence)");
    toy_cmd->add_option("--x1", toy_x1, "conditioning endpoint value");
    toy_cmd->add_option("--t-min", toy_tmin, "time floor t_min");
    toy_cmd->add_option("--seed", toy_seed, "RNG seed");
    toy_cmd->add_option("--train-steps", toy_train_steps, "training steps");
    toy_cmd->add_option("--batch", toy_batch, "training batch size");
    toy_cmd->add_option("--lr", toy_lr, "learning rate");
    toy_cmd->add_option("--buckets", toy_buckets, "denoiser time buckets");
    toy_cmd->add_option("--train-dim", toy_train_dim, "state dimension (train)");
    toy_cmd->add_option("--draws", toy_draws, "draws for oracle-check");
    toy_cmd->add_option("--out", toy_out, "output CSV path");

    // parse; then apply config-file overrides and re-parse
    try {
        app.parse(argc, argv);

        std::string active;
        for (auto* sub : app.get_subcommands()) active = sub->get_name();

        std::string effective_config = config_path;
        if (effective_config.empty()) {
            if (const char* env = std::getenv("SBRIDGE_CONFIG")) effective_config = env;
        }
        if (!effective_config.empty() && !active.empty()) {
            std::vector<std::string> args(argv + 1, argv + argc);
            const auto extra = config_tokens(effective_config, app, active);
            args.insert(args.end(), extra.begin(), extra.end());
            std::vector<std::string> reversed(args.rbegin(), args.rend());
            app.clear();
            app.parse(reversed);
        }
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitValidation;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitValidation;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitRuntime;
    }

    try {
        if (schedule_cmd->parsed()) return cmd_schedule(sched_sched, sched_steps, sched_out);
        if (sample_cmd->parsed())
            return cmd_sample(sample_sampler, sample_sched, sample_toy, sample_ouve,
                              sample_denoiser, sample_steps, sample_tmin, sample_seed,
                              sample_input, sample_output, sample_nfft, sample_hop,
                              sample_rate_expect);
        if (loss_cmd->parsed())
            return cmd_loss(loss_ref, loss_est, loss_nfft, loss_hop, loss_nmels, loss_weights,
                            loss_rate_expect, loss_out);
        if (rank_cmd->parsed())
            return cmd_rank(rank_dir, rank_files, rank_ref_dir, rank_ref_files, rank_eta,
                            rank_nfft, rank_hop, rank_rate_expect, rank_out, rank_json);
        if (toy_cmd->parsed()) {
            if (toy_experiment == "convergence")
                return cmd_toy_convergence(toy_toy, toy_sched, toy_ouve, toy_families,
                                           toy_steps_list, toy_traj, toy_dim, toy_x1, toy_tmin,
                                           toy_seed, toy_out);
            if (toy_experiment == "train")
                return cmd_toy_train(toy_toy, toy_sched, toy_train_steps, toy_batch, toy_lr,
                                     toy_buckets, toy_train_dim, toy_tmin, toy_seed, toy_out);
            if (toy_experiment == "oracle-check")
                return cmd_toy_oracle_check(toy_toy, toy_sched, toy_draws, toy_seed);
            throw std::invalid_argument("unknown experiment: " + toy_experiment);
        }
        throw std::invalid_argument("no subcommand given");
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitValidation;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitRuntime;
    }
}
