// deltanet: generate data, train, evaluate and sweep GRU delta networks.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "dn/data.hpp"
#include "dn/delta_gru.hpp"
#include "dn/kernels.hpp"
#include "dn/train.hpp"

namespace {

struct QFlags {
    int m = 0;
    int f = -1;

    std::optional<dn::QFormat> format() const {
        if (m == 0 && f < 0) return std::nullopt;
        if (m == 0 || f < 0)
            throw CLI::ValidationError("--qm and --qf must be given together");
        return dn::QFormat(m, f);
    }
};

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

double theoretical_from(double o_m, double blended) {
    const double denom = o_m * blended;
    return denom > 0.0 ? 1.0 / denom : std::numeric_limits<double>::infinity();
}

int cmd_gen(const std::string& out, std::size_t classes, std::size_t nx, std::size_t len,
            std::size_t count, double smoothness, double noise, std::uint64_t seed,
            const QFlags& qf) {
    dn::SequenceDataset ds =
        dn::gen_synthetic(classes, nx, len, smoothness, noise, count, seed, qf.format());
    dn::save_dataset(out, ds);
    std::cout << "wrote " << count << " sequences (classes=" << classes << ", nx=" << nx
              << ", len=" << len << ") to " << out << "\n";
    return 0;
}

int cmd_train(const std::string& data_path, const std::string& out,
              const std::string& metrics_path, const std::string& mode_name,
              std::size_t nh, double theta, double beta, double noise_sigma, double lr,
              double momentum, std::size_t epochs, std::size_t batch,
              std::uint64_t seed, const QFlags& qf) {
    const dn::SequenceDataset data = dn::load_dataset(data_path);
    dn::TrainConfig cfg;
    cfg.mode = mode_name == "delta" ? dn::TrainMode::Delta : dn::TrainMode::Dense;
    cfg.theta_train = theta;
    cfg.q = qf.format();
    cfg.noise_sigma = noise_sigma;
    cfg.beta = beta;
    cfg.learning_rate = lr;
    cfg.momentum = momentum;
    cfg.epochs = epochs;
    cfg.batch_size = batch;
    cfg.seed = seed;

    dn::GruModel model =
        dn::init_model(data.n_x, nh, data.n_classes, seed, cfg.q,
                       cfg.mode == dn::TrainMode::Delta ? theta : 0.0);
    dn::TrainResult result = dn::train_loop(model, data, cfg);
    result.model.theta = cfg.mode == dn::TrainMode::Delta ? theta : 0.0;
    dn::save_model(out, result.model);

    if (!metrics_path.empty()) {
        std::ofstream mf(metrics_path);
        if (!mf) throw std::runtime_error(metrics_path + ": cannot open for writing");
        mf << dn::EpochMetrics::csv_header() << "\n";
        for (const dn::EpochMetrics& em : result.history) mf << em.csv_row() << "\n";
    }
    if (!result.history.empty()) {
        const dn::EpochMetrics& last = result.history.back();
        std::cout << "trained " << epochs << " epochs (" << mode_name
                  << "): accuracy=" << fmt(last.accuracy) << " loss=" << fmt(last.loss)
                  << "\n";
    } else {
        std::cout << "trained 0 epochs: model saved unchanged\n";
    }
    std::cout << "model written to " << out << "\n";
    return 0;
}

int cmd_eval(const std::string& model_path, const std::string& data_path, double theta,
             bool theta_given, bool dense, bool weight_sparsity) {
    const dn::GruModel model = dn::load_model(model_path);
    const dn::SequenceDataset data = dn::load_dataset(data_path);
    if (!theta_given) theta = model.theta;

    if (dense) {
        const dn::DenseEval de = dn::evaluate_dense(model, data, model.qformat);
        std::cout << "mode dense\naccuracy " << fmt(de.accuracy) << "\nmacs "
                  << de.counters.macs << "\n";
        return 0;
    }
    const dn::DenseEval de = dn::evaluate_dense(model, data, model.qformat);
    const dn::DeltaEval ev =
        dn::evaluate_delta(model, data, theta, model.qformat, weight_sparsity);
    const dn::SpeedupPair sp = dn::measured_speedup(ev.counters, de.counters);
    const double blended = dn::blended_occupancy(model.gru.input_size(),
                                                 model.gru.hidden_size(), ev.mean_occ_x,
                                                 ev.mean_occ_h);
    std::cout << "mode delta\ntheta " << fmt(theta) << "\naccuracy " << fmt(ev.accuracy)
              << "\nmean_occ_x " << fmt(ev.mean_occ_x) << "\nmean_occ_h "
              << fmt(ev.mean_occ_h) << "\nspeedup_comp " << fmt(sp.comp)
              << "\nspeedup_mem " << fmt(sp.mem) << "\nweight_occupancy "
              << fmt(ev.weight_occupancy) << "\ntheoretical_speedup "
              << fmt(theoretical_from(ev.weight_occupancy, blended)) << "\n";
    return 0;
}

int cmd_sweep(const std::string& model_path, const std::string& data_path,
              std::vector<double> thresholds, const std::string& out,
              bool weight_sparsity) {
    if (thresholds.empty()) throw CLI::ValidationError("--thresholds must be non-empty");
    for (double t : thresholds)
        if (t < 0.0) throw CLI::ValidationError("thresholds must be >= 0");
    std::sort(thresholds.begin(), thresholds.end());

    const dn::GruModel model = dn::load_model(model_path);
    const dn::SequenceDataset data = dn::load_dataset(data_path);
    const dn::DenseEval de = dn::evaluate_dense(model, data, model.qformat);

    std::ofstream rf(out);
    if (!rf) throw std::runtime_error(out + ": cannot open for writing");
    rf << "# deltanet sweep\n";
    rf << "# model " << model_path << "\n";
    rf << "# dataset " << data_path << " (classes=" << data.n_classes
       << ", nx=" << data.n_x << ", count=" << data.sequences.size()
       << ", gen_seed=" << data.seed << ")\n";
    if (model.qformat)
        rf << "# qformat Q" << model.qformat->int_bits << "." << model.qformat->frac_bits
           << "\n";
    else
        rf << "# qformat none\n";
    rf << "# weight_sparsity " << (weight_sparsity ? "on" : "off") << "\n";
    rf << "theta,accuracy,mean_occ_x,mean_occ_h,speedup_comp,speedup_mem";
    if (weight_sparsity) rf << ",speedup_comp_ws,speedup_mem_ws";
    rf << ",theoretical_speedup";
    if (weight_sparsity) rf << ",theoretical_speedup_ws";
    rf << "\n";

    for (double theta : thresholds) {
        const dn::DeltaEval ev =
            dn::evaluate_delta(model, data, theta, model.qformat, false);
        const dn::SpeedupPair sp = dn::measured_speedup(ev.counters, de.counters);
        const double blended = dn::blended_occupancy(model.gru.input_size(),
                                                     model.gru.hidden_size(),
                                                     ev.mean_occ_x, ev.mean_occ_h);
        rf << fmt(theta) << ',' << fmt(ev.accuracy) << ',' << fmt(ev.mean_occ_x) << ','
           << fmt(ev.mean_occ_h) << ',' << fmt(sp.comp) << ',' << fmt(sp.mem);
        if (weight_sparsity) {
            const dn::DeltaEval ws =
                dn::evaluate_delta(model, data, theta, model.qformat, true);
            const dn::SpeedupPair wsp = dn::measured_speedup(ws.counters, de.counters);
            rf << ',' << fmt(wsp.comp) << ',' << fmt(wsp.mem);
            rf << ',' << fmt(theoretical_from(1.0, blended));
            rf << ',' << fmt(theoretical_from(ws.weight_occupancy, blended));
        } else {
            rf << ',' << fmt(theoretical_from(1.0, blended));
        }
        rf << "\n";
    }
    if (!rf) throw std::runtime_error(out + ": write failed");
    std::cout << "sweep report written to " << out << "\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"GRU delta-network engine and cost simulator"};
    app.require_subcommand(1);

    std::string kernel_backend = "auto";
    app.add_option("--kernels", kernel_backend,
                   "Kernel backend: auto, scalar, avx2, neon")
        ->capture_default_str();

    // gen
    auto* gen = app.add_subcommand("gen", "Generate a synthetic dataset");
    std::string gen_out;
    std::size_t gen_classes = 5, gen_nx = 16, gen_len = 100, gen_count = 500;
    double gen_smoothness = 0.95, gen_noise = 0.1;
    std::uint64_t gen_seed = 1;
    QFlags gen_q;
    gen->add_option("--out", gen_out, "Output dataset file")->required();
    gen->add_option("--classes", gen_classes, "Number of classes")->check(CLI::PositiveNumber);
    gen->add_option("--nx", gen_nx, "Feature dimension")->check(CLI::PositiveNumber);
    gen->add_option("--len", gen_len, "Timesteps per sequence")->check(CLI::PositiveNumber);
    gen->add_option("--count", gen_count, "Number of sequences")->check(CLI::PositiveNumber);
    gen->add_option("--smoothness", gen_smoothness,
                    "One-step autocorrelation of the noise, in [0,1)")
        ->check(CLI::Range(0.0, 0.999999));
    gen->add_option("--noise", gen_noise, "Stationary noise std")->check(CLI::NonNegativeNumber);
    gen->add_option("--seed", gen_seed, "Generation seed");
    gen->add_option("--qm", gen_q.m, "Clip features to Qm.f: integer bits");
    gen->add_option("--qf", gen_q.f, "Clip features to Qm.f: fractional bits");

    // train
    auto* train = app.add_subcommand("train", "Train a model");
    std::string train_data, train_out, train_metrics, train_mode = "dense";
    std::size_t train_nh = 64, train_epochs = 60, train_batch = 16;
    double train_theta = 0.0, train_beta = 0.0, train_noise = 0.0, train_lr = 0.1,
           train_momentum = 0.9;
    std::uint64_t train_seed = 1;
    QFlags train_q;
    train->add_option("--data", train_data, "Training dataset file")->required();
    train->add_option("--out", train_out, "Output model file")->required();
    train->add_option("--metrics", train_metrics, "Per-epoch metrics CSV");
    train->add_option("--mode", train_mode, "dense or delta")
        ->check(CLI::IsMember({"dense", "delta"}));
    train->add_option("--nh", train_nh, "Hidden units")->check(CLI::PositiveNumber);
    train->add_option("--theta", train_theta, "Training threshold (delta mode)")
        ->check(CLI::NonNegativeNumber);
    train->add_option("--beta", train_beta, "L1 weight on delta-h")
        ->check(CLI::NonNegativeNumber);
    train->add_option("--noise-sigma", train_noise, "Gaussian noise std (dense mode)")
        ->check(CLI::NonNegativeNumber);
    train->add_option("--lr", train_lr, "Learning rate")->check(CLI::PositiveNumber);
    train->add_option("--momentum", train_momentum, "SGD momentum")
        ->check(CLI::Range(0.0, 1.0));
    train->add_option("--epochs", train_epochs, "Epochs");
    train->add_option("--batch", train_batch, "Batch size")->check(CLI::PositiveNumber);
    train->add_option("--seed", train_seed, "Seed for init, shuffling and noise");
    train->add_option("--qm", train_q.m, "Activation Qm.f: integer bits");
    train->add_option("--qf", train_q.f, "Activation Qm.f: fractional bits");

    // eval
    auto* eval = app.add_subcommand("eval", "Evaluate a model on a dataset");
    std::string eval_model, eval_data;
    double eval_theta = 0.0;
    bool eval_dense = false, eval_ws = false;
    eval->add_option("--model", eval_model, "Model file")->required();
    eval->add_option("--data", eval_data, "Dataset file")->required();
    auto* eval_theta_opt = eval->add_option("--theta", eval_theta,
                                            "Delta threshold (default: model theta)")
                               ->check(CLI::NonNegativeNumber);
    eval->add_flag("--dense", eval_dense, "Reference dense evaluation only");
    eval->add_flag("--weight-sparsity", eval_ws, "Charge only stored nonzero weights");

    // sweep
    auto* sweep = app.add_subcommand("sweep", "Accuracy/speedup sweep over thresholds");
    std::string sweep_model, sweep_data, sweep_out;
    std::vector<double> sweep_thresholds;
    bool sweep_ws = false;
    sweep->add_option("--model", sweep_model, "Model file")->required();
    sweep->add_option("--data", sweep_data, "Held-out dataset file")->required();
    sweep->add_option("--thresholds", sweep_thresholds, "Comma-separated thresholds")
        ->required()
        ->delimiter(',');
    sweep->add_option("--out", sweep_out, "Report CSV path")->required();
    sweep->add_flag("--weight-sparsity", sweep_ws,
                    "Also report speedups with compressed-weight accounting");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    if (!dn::kernels::select(kernel_backend)) {
        std::cerr << "unknown or unavailable kernel backend: " << kernel_backend << "\n";
        return 2;
    }

    try {
        if (gen->parsed())
            return cmd_gen(gen_out, gen_classes, gen_nx, gen_len, gen_count,
                           gen_smoothness, gen_noise, gen_seed, gen_q);
        if (train->parsed())
            return cmd_train(train_data, train_out, train_metrics, train_mode, train_nh,
                             train_theta, train_beta, train_noise, train_lr,
                             train_momentum, train_epochs, train_batch, train_seed,
                             train_q);
        if (eval->parsed())
            return cmd_eval(eval_model, eval_data, eval_theta,
                            eval_theta_opt->count() > 0, eval_dense, eval_ws);
        if (sweep->parsed())
            return cmd_sweep(sweep_model, sweep_data, sweep_thresholds, sweep_out,
                             sweep_ws);
    } catch (const CLI::ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}
