#include "subpt/synth.hpp"

#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include "subpt/linalg.hpp"
#include "subpt/textio.hpp"

namespace subpt::synth {

namespace {

std::vector<double> gaussian_vec(std::mt19937_64& rng, std::size_t n) {
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::vector<double> v(n);
    for (double& x : v) x = gauss(rng);
    return v;
}

std::vector<double> unit(std::vector<double> v) {
    const double n = norm2(v);
    if (n < 1e-300) throw Error("RankDeficient", "cannot normalize zero vector");
    for (double& x : v) x /= n;
    return v;
}

model::Feature make_sample(const std::vector<double>& base_dir, double sigma,
                           std::mt19937_64& rng) {
    std::vector<double> v = base_dir;
    if (sigma > 0.0) {
        std::normal_distribution<double> gauss(0.0, 1.0);
        for (double& x : v) x += sigma * gauss(rng);
    }
    return model::Feature{unit(std::move(v))};
}

std::vector<double> axpy(const std::vector<double>& a, double beta,
                         const std::vector<double>& b) {
    std::vector<double> v = a;
    for (std::size_t i = 0; i < v.size(); ++i) v[i] += beta * b[i];
    return v;
}

}  // namespace

std::vector<model::Feature> SyntheticTask::teacher_base() const {
    return {teacher.begin(), teacher.begin() + static_cast<std::ptrdiff_t>(cfg.n_base)};
}
std::vector<model::Feature> SyntheticTask::teacher_novel() const {
    auto b = teacher.begin() + static_cast<std::ptrdiff_t>(cfg.n_base);
    return {b, b + static_cast<std::ptrdiff_t>(cfg.n_novel)};
}
std::vector<model::Feature> SyntheticTask::teacher_pool() const {
    return {teacher.begin() + static_cast<std::ptrdiff_t>(cfg.n_base + cfg.n_novel),
            teacher.end()};
}

SyntheticTask generate_task(const SynthConfig& cfg) {
    if (cfg.n_base < 1 || cfg.n_novel < 1 || cfg.n_pool < 1 || cfg.shots < 1 ||
        cfg.test_per_class < 1 || cfg.feat_dim < 1 || cfg.embed_dim < 1)
        throw Error("ConfigInvalid", "all counts must be >= 1");
    if (cfg.beta < 0.0 || cfg.sigma < 0.0 || cfg.teacher_eps < 0.0)
        throw Error("ConfigInvalid", "beta, sigma, teacher_eps must be >= 0");
    const std::size_t n_ortho = 2 * cfg.n_base + cfg.n_novel;
    if (cfg.feat_dim < n_ortho)
        throw Error("DimensionTooSmall",
                    "feat_dim must fit mutually orthogonal directions (>= 2*n_base + n_novel)");

    std::mt19937_64 rng(cfg.seed);
    SyntheticTask task;
    task.cfg = cfg;

    for (std::size_t i = 0; i < cfg.n_base; ++i)
        task.base_classes.push_back({unit(gaussian_vec(rng, cfg.embed_dim))});
    for (std::size_t i = 0; i < cfg.n_novel; ++i)
        task.novel_classes.push_back({unit(gaussian_vec(rng, cfg.embed_dim))});
    for (std::size_t i = 0; i < cfg.n_pool; ++i)
        task.pool_classes.push_back({unit(gaussian_vec(rng, cfg.embed_dim))});

    // Generalizable and spurious directions: one orthonormal family.
    linalg::DenseMatrix raw(n_ortho, cfg.feat_dim);
    for (std::size_t i = 0; i < n_ortho; ++i) {
        auto row = gaussian_vec(rng, cfg.feat_dim);
        for (std::size_t j = 0; j < cfg.feat_dim; ++j) raw(i, j) = row[j];
    }
    linalg::DenseMatrix ortho = linalg::orthonormalize(raw);
    for (std::size_t i = 0; i < cfg.n_base + cfg.n_novel; ++i)
        task.gen_dirs.push_back(ortho.row(i));
    for (std::size_t i = 0; i < cfg.n_base; ++i)
        task.spur_dirs.push_back(ortho.row(cfg.n_base + cfg.n_novel + i));

    for (std::size_t i = 0; i < cfg.n_pool; ++i)
        task.pool_dirs.push_back(unit(gaussian_vec(rng, cfg.feat_dim)));

    for (std::size_t i = 0; i < cfg.n_base; ++i) {
        const auto train_dir = axpy(task.gen_dirs[i], cfg.beta, task.spur_dirs[i]);
        for (std::size_t s = 0; s < cfg.shots; ++s)
            task.train.push_back({make_sample(train_dir, cfg.sigma, rng), i});
    }

    std::uniform_int_distribution<int> coin(0, 1);
    for (std::size_t i = 0; i < cfg.n_base; ++i) {
        for (std::size_t s = 0; s < cfg.test_per_class; ++s) {
            if (cfg.spurious_test_mode == SpuriousTestMode::Absent) {
                task.base_test.push_back({make_sample(task.gen_dirs[i], cfg.sigma, rng), i});
            } else {
                const double flip = coin(rng) == 0 ? -1.0 : 1.0;
                const auto dir = axpy(task.gen_dirs[i], flip * cfg.beta, task.spur_dirs[i]);
                task.base_test.push_back({make_sample(dir, cfg.sigma, rng), i});
            }
        }
    }
    for (std::size_t j = 0; j < cfg.n_novel; ++j)
        for (std::size_t s = 0; s < cfg.test_per_class; ++s)
            task.novel_test.push_back(
                {make_sample(task.gen_dirs[cfg.n_base + j], cfg.sigma, rng), j});

    task.teacher = teacher_features(task, cfg.teacher_eps, cfg.seed + 0x9e3779b97f4a7c15ULL);
    return task;
}

std::vector<model::Feature> teacher_features(const SyntheticTask& task, double eps,
                                             std::uint64_t seed) {
    if (eps < 0.0) throw Error("ConfigInvalid", "eps must be >= 0");
    std::mt19937_64 rng(seed);
    std::vector<model::Feature> out;
    auto emit = [&](const std::vector<double>& dir) {
        out.push_back(make_sample(dir, eps, rng));
    };
    for (std::size_t i = 0; i < task.cfg.n_base; ++i) emit(task.gen_dirs[i]);
    for (std::size_t j = 0; j < task.cfg.n_novel; ++j)
        emit(task.gen_dirs[task.cfg.n_base + j]);
    for (std::size_t i = 0; i < task.cfg.n_pool; ++i) emit(task.pool_dirs[i]);
    return out;
}

namespace {

void write_rows(std::ofstream& out, const std::string& name,
                const std::vector<std::vector<double>>& rows) {
    out << name << ' ' << rows.size() << '\n';
    for (const auto& r : rows) out << textio::fmt_row(r) << '\n';
}

void write_samples(std::ofstream& out, const std::string& name,
                   const std::vector<Sample>& samples) {
    out << name << ' ' << samples.size() << '\n';
    for (const auto& s : samples)
        out << s.label << ' ' << textio::fmt_row(s.z.vector) << '\n';
}

std::vector<std::vector<double>> read_rows(std::ifstream& in, const std::string& name,
                                           std::size_t dim) {
    std::string line;
    if (!std::getline(in, line)) throw Error("BadFormat", "missing section " + name);
    std::istringstream hs(line);
    std::string got;
    std::size_t count = 0;
    if (!(hs >> got >> count) || got != name)
        throw Error("BadFormat", "expected section " + name + ", got: " + line);
    std::vector<std::vector<double>> rows;
    for (std::size_t i = 0; i < count; ++i) {
        if (!std::getline(in, line)) throw Error("BadFormat", "truncated section " + name);
        rows.push_back(textio::parse_row(line, dim, name));
    }
    return rows;
}

std::vector<Sample> read_samples(std::ifstream& in, const std::string& name,
                                 std::size_t dim, std::size_t n_labels) {
    std::string line;
    if (!std::getline(in, line)) throw Error("BadFormat", "missing section " + name);
    std::istringstream hs(line);
    std::string got;
    std::size_t count = 0;
    if (!(hs >> got >> count) || got != name)
        throw Error("BadFormat", "expected section " + name + ", got: " + line);
    std::vector<Sample> samples;
    for (std::size_t i = 0; i < count; ++i) {
        if (!std::getline(in, line)) throw Error("BadFormat", "truncated section " + name);
        std::istringstream ss(line);
        Sample s;
        if (!(ss >> s.label) || s.label >= n_labels)
            throw Error("BadFormat", name + ": bad label");
        std::string rest;
        std::getline(ss, rest);
        s.z.vector = textio::parse_row(rest, dim, name);
        samples.push_back(std::move(s));
    }
    return samples;
}

}  // namespace

void save(const SyntheticTask& task, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw Error("IoFailure", "cannot open for writing: " + path);
    const SynthConfig& c = task.cfg;
    out << "SUBPT-TASK 1\n";
    out << "cfg " << c.n_base << ' ' << c.n_novel << ' ' << c.n_pool << ' ' << c.feat_dim
        << ' ' << c.embed_dim << ' ' << c.shots << ' ' << c.test_per_class << ' '
        << textio::fmt(c.beta) << ' ' << textio::fmt(c.sigma) << ' '
        << textio::fmt(c.teacher_eps) << ' '
        << (c.spurious_test_mode == SpuriousTestMode::Absent ? "absent" : "flipped") << ' '
        << c.seed << '\n';

    auto embeds = [](const std::vector<model::ClassEmbedding>& cs) {
        std::vector<std::vector<double>> rows;
        for (const auto& e : cs) rows.push_back(e.vector);
        return rows;
    };
    auto feats = [](const std::vector<model::Feature>& fs) {
        std::vector<std::vector<double>> rows;
        for (const auto& f : fs) rows.push_back(f.vector);
        return rows;
    };
    write_rows(out, "base_classes", embeds(task.base_classes));
    write_rows(out, "novel_classes", embeds(task.novel_classes));
    write_rows(out, "pool_classes", embeds(task.pool_classes));
    write_rows(out, "gen_dirs", task.gen_dirs);
    write_rows(out, "spur_dirs", task.spur_dirs);
    write_rows(out, "pool_dirs", task.pool_dirs);
    write_samples(out, "train", task.train);
    write_samples(out, "base_test", task.base_test);
    write_samples(out, "novel_test", task.novel_test);
    write_rows(out, "teacher", feats(task.teacher));
    if (!out) throw Error("IoFailure", "write failed: " + path);
}

SyntheticTask load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("IoFailure", "cannot open for reading: " + path);
    std::string line;
    if (!std::getline(in, line) || line != "SUBPT-TASK 1")
        throw Error("BadFormat", "bad task header");
    if (!std::getline(in, line)) throw Error("BadFormat", "missing cfg line");
    std::istringstream cs(line);
    std::string tag, mode;
    SynthConfig c;
    if (!(cs >> tag >> c.n_base >> c.n_novel >> c.n_pool >> c.feat_dim >> c.embed_dim >>
          c.shots >> c.test_per_class >> c.beta >> c.sigma >> c.teacher_eps >> mode >>
          c.seed) ||
        tag != "cfg")
        throw Error("BadFormat", "bad cfg line");
    if (mode == "absent")
        c.spurious_test_mode = SpuriousTestMode::Absent;
    else if (mode == "flipped")
        c.spurious_test_mode = SpuriousTestMode::Flipped;
    else
        throw Error("BadFormat", "bad spurious_test_mode: " + mode);

    SyntheticTask task;
    task.cfg = c;
    auto to_embeds = [](std::vector<std::vector<double>> rows) {
        std::vector<model::ClassEmbedding> cs_;
        for (auto& r : rows) cs_.push_back({std::move(r)});
        return cs_;
    };
    task.base_classes = to_embeds(read_rows(in, "base_classes", c.embed_dim));
    task.novel_classes = to_embeds(read_rows(in, "novel_classes", c.embed_dim));
    task.pool_classes = to_embeds(read_rows(in, "pool_classes", c.embed_dim));
    task.gen_dirs = read_rows(in, "gen_dirs", c.feat_dim);
    task.spur_dirs = read_rows(in, "spur_dirs", c.feat_dim);
    task.pool_dirs = read_rows(in, "pool_dirs", c.feat_dim);
    task.train = read_samples(in, "train", c.feat_dim, c.n_base);
    task.base_test = read_samples(in, "base_test", c.feat_dim, c.n_base);
    task.novel_test = read_samples(in, "novel_test", c.feat_dim, c.n_novel);
    auto teach = read_rows(in, "teacher", c.feat_dim);
    for (auto& r : teach) task.teacher.push_back({std::move(r)});
    return task;
}

}  // namespace subpt::synth
