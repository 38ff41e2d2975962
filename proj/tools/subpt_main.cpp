// Command-line front end: generate synthetic tasks, run training, fit and
// inspect PCA subspaces, and aggregate seed sweeps into CSV reports.

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "subpt/subspace.hpp"
#include "subpt/synth.hpp"
#include "subpt/textio.hpp"
#include "subpt/trainer.hpp"
#include "subpt/trajectory.hpp"

namespace fs = std::filesystem;
using namespace subpt;

namespace {

constexpr const char* kToolVersion = "subpt 1.0.0";

struct ManifestWriter {
    std::vector<std::pair<std::string, std::string>> entries;
    std::vector<std::string> files;
    std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();

    void put(const std::string& k, const std::string& v) { entries.emplace_back(k, v); }
    void put(const std::string& k, double v) { entries.emplace_back(k, textio::fmt(v)); }
    void put(const std::string& k, std::size_t v) {
        entries.emplace_back(k, std::to_string(v));
    }

    void write(const fs::path& path) {
        const auto dur = std::chrono::duration<double>(
                             std::chrono::steady_clock::now() - start)
                             .count();
        std::ofstream out(path);
        out << "tool_version = " << kToolVersion << '\n';
        for (const auto& [k, v] : entries) out << k << " = " << v << '\n';
        out << "wall_clock_seconds = " << textio::fmt(dur) << '\n';
        for (const auto& f : files) out << "file = " << f << '\n';
    }
};

void add_synth_options(CLI::App* cmd, synth::SynthConfig& cfg, std::string& mode_str) {
    cmd->add_option("--seed", cfg.seed, "PRNG seed");
    cmd->add_option("--n-base", cfg.n_base, "base class count");
    cmd->add_option("--n-novel", cfg.n_novel, "novel class count");
    cmd->add_option("--n-pool", cfg.n_pool, "NFL pool class count");
    cmd->add_option("--feat-dim", cfg.feat_dim, "feature dimension D");
    cmd->add_option("--embed-dim", cfg.embed_dim, "class embedding dimension d");
    cmd->add_option("--shots", cfg.shots, "train samples per base class");
    cmd->add_option("--test-per-class", cfg.test_per_class, "test samples per class");
    cmd->add_option("--beta", cfg.beta, "spurious strength");
    cmd->add_option("--sigma", cfg.sigma, "noise scale");
    cmd->add_option("--teacher-eps", cfg.teacher_eps, "teacher perturbation");
    cmd->add_option("--spurious-test-mode", mode_str, "absent | flipped")
        ->check(CLI::IsMember({"absent", "flipped"}));
}

void add_train_options(CLI::App* cmd, train::TrainConfig& cfg, std::string& mode,
                       std::string& sched, std::string& nfl, std::uint64_t& enc_seed) {
    cmd->add_option("--seed", cfg.seed, "run seed (prompt init)");
    cmd->add_option("--encoder-seed", enc_seed, "frozen encoder seed");
    cmd->add_option("--epochs", cfg.epochs, "epoch count");
    cmd->add_option("--lr", cfg.lr, "learning rate");
    cmd->add_option("--lr-schedule", sched, "constant | cosine")
        ->check(CLI::IsMember({"constant", "cosine"}));
    cmd->add_option("--momentum", cfg.momentum, "SGD momentum");
    cmd->add_option("--tokens", cfg.tokens, "prompt token count M");
    cmd->add_option("--token-dim", cfg.token_dim, "token dimension d");
    cmd->add_option("--hidden", cfg.hidden, "encoder hidden width");
    cmd->add_option("--init-std", cfg.init_std, "prompt init stddev");
    cmd->add_option("--tau", cfg.tau, "softmax temperature");
    cmd->add_option("--lambda", cfg.lambda, "NFL loss weight");
    cmd->add_option("--nfl-target", nfl, "none | base | novel | whole | pool")
        ->check(CLI::IsMember({"none", "base", "novel", "whole", "pool"}));
    cmd->add_option("--t-early", cfg.t_early, "last epoch of the early window");
    cmd->add_option("--r", cfg.rank, "subspace rank");
    cmd->add_option("--mode", mode, "coop | projected | subpt")
        ->check(CLI::IsMember({"coop", "projected", "subpt"}));
}

void write_run(const fs::path& dir, const train::RunResult& run, ManifestWriter& manifest,
               const std::string& prefix = "") {
    const auto traj_path = dir / (prefix + "traj.txt");
    const auto metrics_path = dir / (prefix + "metrics.csv");
    traj::save(run.trajectory, traj_path.string());
    train::save_metrics_csv(run.metrics, metrics_path.string());
    manifest.files.push_back(traj_path.string());
    manifest.files.push_back(metrics_path.string());
    if (run.subspace) {
        const auto sub_path = dir / (prefix + "subspace.txt");
        sub::save(*run.subspace, sub_path.string());
        manifest.files.push_back(sub_path.string());
    }
}

int cmd_gen_data(const synth::SynthConfig& cfg, const std::string& out_path) {
    auto task = synth::generate_task(cfg);
    synth::save(task, out_path);
    std::cout << "wrote " << out_path << " (" << task.train.size() << " train, "
              << task.base_test.size() << " base test, " << task.novel_test.size()
              << " novel test samples)\n";
    return 0;
}

int cmd_train(const train::TrainConfig& cfg, std::uint64_t enc_seed,
              const std::string& task_path, const std::string& out_dir,
              const std::string& sub_path) {
    auto task = synth::load(task_path);
    auto enc = model::build_encoder(enc_seed, cfg.token_dim, cfg.tokens, cfg.hidden,
                                    task.cfg.feat_dim);
    fs::create_directories(out_dir);

    ManifestWriter manifest;
    manifest.put("command", "train");
    manifest.put("task", task_path);
    manifest.put("out", out_dir);
    manifest.put("encoder_seed", static_cast<std::size_t>(enc_seed));
    manifest.put("config", cfg.fingerprint());

    if (cfg.mode == train::Mode::SubptPipeline) {
        auto pipe = train::subpt_pipeline(cfg, task, enc);
        write_run(out_dir, pipe.stage1, manifest, "stage1_");
        const auto sp = fs::path(out_dir) / "subspace.txt";
        sub::save(pipe.subspace, sp.string());
        manifest.files.push_back(sp.string());
        write_run(out_dir, pipe.stage3, manifest, "");
        std::cout << "stage1 final base acc " << pipe.stage1.metrics.back().base_test_acc
                  << ", stage3 final base acc " << pipe.stage3.metrics.back().base_test_acc
                  << '\n';
    } else if (cfg.mode == train::Mode::Projected) {
        if (sub_path.empty())
            throw Error("ConfigInvalid", "--sub is required for mode projected");
        auto s = sub::load(sub_path);
        auto run = train::train(cfg, task, enc, s);
        write_run(out_dir, run, manifest);
        std::cout << "final base acc " << run.metrics.back().base_test_acc << '\n';
    } else {
        auto run = train::train(cfg, task, enc);
        write_run(out_dir, run, manifest);
        std::cout << "final base acc " << run.metrics.back().base_test_acc
                  << ", novel acc " << run.metrics.back().novel_test_acc << '\n';
    }
    manifest.write(fs::path(out_dir) / "manifest.txt");
    return 0;
}

int cmd_pca(const std::string& traj_path, std::size_t t1, std::size_t t2, std::size_t r,
            const std::string& out_path) {
    auto t = traj::load(traj_path);
    auto s = sub::pca_fit(t, {t1, t2}, r);
    std::cout << "window " << t1 << ".." << t2 << " rank " << r << '\n';
    for (std::size_t k = 0; k < s.rank(); ++k)
        std::cout << "  lambda_" << k + 1 << " = " << textio::fmt(s.eigenvalues[k])
                  << "  variance_ratio = " << textio::fmt(s.variance_ratios[k]) << '\n';
    if (!out_path.empty()) {
        sub::save(s, out_path);
        std::cout << "wrote " << out_path << '\n';
    }
    return 0;
}

int cmd_analyze(const std::string& traj_path, const std::string& traj2_path,
                std::vector<std::size_t> early, std::vector<std::size_t> later,
                std::size_t r) {
    auto ta = traj::load(traj_path);
    auto tb = traj2_path.empty() ? ta : traj::load(traj2_path);
    auto a = sub::pca_fit(ta, {early[0], early[1]}, r);
    auto b = sub::pca_fit(tb, {later[0], later[1]}, r);
    std::cout << "leading_alignment = " << textio::fmt(sub::leading_alignment(a, b))
              << '\n';
    auto dump = [](const char* name, const sub::Subspace& s) {
        std::cout << name << " variance ratios:";
        for (double v : s.variance_ratios) std::cout << ' ' << textio::fmt(v);
        std::cout << '\n';
    };
    dump("early", a);
    dump("later", b);
    return 0;
}

struct CurvePoint {
    double sum = 0.0, sq = 0.0;
    std::size_t n = 0;
    void add(double x) {
        sum += x;
        sq += x * x;
        ++n;
    }
    double mean() const { return sum / static_cast<double>(n); }
    double stddev() const {
        if (n < 2) return 0.0;
        const double m = mean();
        return std::sqrt(std::max(0.0, (sq - static_cast<double>(n) * m * m) /
                                           static_cast<double>(n - 1)));
    }
};

// Aggregates metrics.csv files from prior train runs into a mean/std curve
// CSV. Never recomputes training.
int cmd_report(const std::vector<std::string>& runs, const std::string& out_path) {
    constexpr std::size_t kCols = 7;  // numeric columns after "epoch"
    std::vector<std::array<CurvePoint, kCols>> curve;
    for (const auto& dir : runs) {
        const fs::path p =
            fs::is_directory(dir) ? fs::path(dir) / "metrics.csv" : fs::path(dir);
        std::ifstream in(p);
        if (!in) throw Error("IoFailure", "cannot read " + p.string());
        std::string line;
        std::getline(in, line);  // header
        std::size_t row = 0;
        while (std::getline(in, line)) {
            for (char& c : line)
                if (c == ',') c = ' ';
            std::istringstream ss(line);
            std::size_t epoch;
            ss >> epoch;
            if (curve.size() <= row) curve.emplace_back();
            for (std::size_t c = 0; c < kCols; ++c) {
                double x;
                ss >> x;
                curve[row][c].add(x);
            }
            ++row;
        }
    }
    if (curve.empty()) throw Error("BadFormat", "no metrics rows found");

    std::ofstream out(out_path);
    if (!out) throw Error("IoFailure", "cannot write " + out_path);
    const char* names[kCols] = {"train_loss",    "train_acc",
                                "base_test_acc", "novel_test_acc",
                                "grad_norm_raw", "grad_norm_projected",
                                "nfl_loss"};
    out << "epoch";
    for (const auto* n : names) out << ',' << n << "_mean," << n << "_std";
    out << '\n';
    char buf[64];
    for (std::size_t row = 0; row < curve.size(); ++row) {
        out << row + 1;
        for (std::size_t c = 0; c < kCols; ++c) {
            std::snprintf(buf, sizeof buf, ",%.9g,%.9g", curve[row][c].mean(),
                          curve[row][c].stddev());
            out << buf;
        }
        out << '\n';
    }
    std::cout << "wrote " << out_path << " (" << runs.size() << " runs, " << curve.size()
              << " epochs)\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Subspace prompt tuning experiments"};
    app.require_subcommand(1);
    app.set_config("--config")->configurable(false);
    app.set_version_flag("--version", kToolVersion);

    // gen-data
    synth::SynthConfig synth_cfg;
    std::string synth_mode = "absent";
    std::string gen_out;
    auto* gen = app.add_subcommand("gen-data", "generate a synthetic few-shot task");
    add_synth_options(gen, synth_cfg, synth_mode);
    gen->add_option("--out", gen_out, "output task file")->required();

    // train
    train::TrainConfig train_cfg;
    std::string train_mode = "coop", train_sched = "cosine", train_nfl = "none";
    std::uint64_t enc_seed = 42;
    std::string task_path, out_dir, sub_path;
    auto* tr = app.add_subcommand("train", "run prompt tuning");
    add_train_options(tr, train_cfg, train_mode, train_sched, train_nfl, enc_seed);
    tr->add_option("--task", task_path, "task file from gen-data")->required();
    tr->add_option("--out", out_dir, "output directory")->required();
    tr->add_option("--sub", sub_path, "subspace file (mode projected)");

    // pca
    std::string pca_traj, pca_out;
    std::vector<std::size_t> pca_window;
    std::size_t pca_r = 1;
    auto* pca = app.add_subcommand("pca", "fit a PCA subspace over a trajectory window");
    pca->add_option("--traj", pca_traj, "trajectory file")->required();
    pca->add_option("--window", pca_window, "t1 t2")->expected(2)->required();
    pca->add_option("--r", pca_r, "rank")->required();
    pca->add_option("--out", pca_out, "write the fitted subspace here");

    // analyze
    std::string an_traj, an_traj2;
    std::vector<std::size_t> an_early, an_later;
    std::size_t an_r = 1;
    auto* an = app.add_subcommand("analyze",
                                  "early/later eigenvector alignment and spectra");
    an->add_option("--traj", an_traj, "trajectory file")->required();
    an->add_option("--traj2", an_traj2, "second trajectory (defaults to --traj)");
    an->add_option("--early", an_early, "t1 t2")->expected(2)->required();
    an->add_option("--later", an_later, "t3 t4")->expected(2)->required();
    an->add_option("--r", an_r, "rank")->required();

    // report
    std::vector<std::string> rep_runs;
    std::string rep_out;
    auto* rep = app.add_subcommand("report", "aggregate run metrics into a curve CSV");
    rep->add_option("--runs", rep_runs, "run directories or metrics.csv files")
        ->required()
        ->expected(-1);
    rep->add_option("--out", rep_out, "output CSV")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);
        app.exit(e);
        return 1;
    }

    try {
        if (*gen) {
            synth_cfg.spurious_test_mode = synth_mode == "flipped"
                                               ? synth::SpuriousTestMode::Flipped
                                               : synth::SpuriousTestMode::Absent;
            return cmd_gen_data(synth_cfg, gen_out);
        }
        if (*tr) {
            train_cfg.mode = train::parse_mode(train_mode);
            train_cfg.lr_schedule = train::parse_schedule(train_sched);
            train_cfg.nfl_target = train::parse_nfl_target(train_nfl);
            return cmd_train(train_cfg, enc_seed, task_path, out_dir, sub_path);
        }
        if (*pca) return cmd_pca(pca_traj, pca_window[0], pca_window[1], pca_r, pca_out);
        if (*an) return cmd_analyze(an_traj, an_traj2, an_early, an_later, an_r);
        if (*rep) return cmd_report(rep_runs, rep_out);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 1;
}
