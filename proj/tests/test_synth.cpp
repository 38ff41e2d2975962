#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "subpt/synth.hpp"

using namespace subpt;
using synth::SynthConfig;

TEST_CASE("generate_task determinism") {
    SynthConfig cfg;
    cfg.n_pool = 10;
    cfg.test_per_class = 5;
    auto a = synth::generate_task(cfg);
    auto b = synth::generate_task(cfg);
    CHECK(a.train.size() == b.train.size());
    for (std::size_t i = 0; i < a.train.size(); ++i) {
        CHECK(a.train[i].label == b.train[i].label);
        CHECK(a.train[i].z.vector == b.train[i].z.vector);
    }
    CHECK(a.gen_dirs == b.gen_dirs);
    CHECK(a.teacher.size() == b.teacher.size());
    for (std::size_t i = 0; i < a.teacher.size(); ++i)
        CHECK(a.teacher[i].vector == b.teacher[i].vector);

    cfg.seed = 1;
    auto c = synth::generate_task(cfg);
    CHECK(a.gen_dirs != c.gen_dirs);
}

TEST_CASE("noiseless task is exactly the generalizable directions") {
    SynthConfig cfg;
    cfg.beta = 0.0;
    cfg.sigma = 0.0;
    cfg.n_pool = 4;
    cfg.test_per_class = 3;
    auto task = synth::generate_task(cfg);
    for (const auto& s : task.train) {
        const auto& g = task.gen_dirs[s.label];
        for (std::size_t j = 0; j < g.size(); ++j)
            CHECK(s.z.vector[j] == doctest::Approx(g[j]).epsilon(1e-12));
    }
    // Nearest-direction classification is perfect.
    for (const auto& s : task.base_test) {
        std::size_t best = 0;
        double best_sim = -2.0;
        for (std::size_t i = 0; i < cfg.n_base; ++i) {
            const double sim = dot(s.z.vector, task.gen_dirs[i]);
            if (sim > best_sim) {
                best_sim = sim;
                best = i;
            }
        }
        CHECK(best == s.label);
    }
}

TEST_CASE("direction orthogonality and unit norms on default config") {
    SynthConfig cfg;
    cfg.n_pool = 10;
    cfg.test_per_class = 5;
    auto task = synth::generate_task(cfg);

    std::vector<const std::vector<double>*> dirs;
    for (const auto& g : task.gen_dirs) dirs.push_back(&g);
    for (const auto& s : task.spur_dirs) dirs.push_back(&s);
    for (std::size_t i = 0; i < dirs.size(); ++i) {
        CHECK(std::fabs(norm2(*dirs[i]) - 1.0) < 1e-12);
        for (std::size_t j = i + 1; j < dirs.size(); ++j)
            CHECK(std::fabs(dot(*dirs[i], *dirs[j])) < 1e-10);
    }
    for (const auto& s : task.train) CHECK(std::fabs(norm2(s.z.vector) - 1.0) < 1e-12);
    for (const auto& f : task.teacher) CHECK(std::fabs(norm2(f.vector) - 1.0) < 1e-12);
}

TEST_CASE("dimension too small is rejected") {
    SynthConfig cfg;
    cfg.feat_dim = 10;  // < 2*8 + 8
    CHECK_THROWS_AS(synth::generate_task(cfg), Error);
}

TEST_CASE("teacher_features") {
    SynthConfig cfg;
    cfg.n_pool = 6;
    cfg.test_per_class = 3;
    auto task = synth::generate_task(cfg);

    auto exact = synth::teacher_features(task, 0.0, 7);
    for (std::size_t i = 0; i < cfg.n_base + cfg.n_novel; ++i)
        for (std::size_t j = 0; j < cfg.feat_dim; ++j)
            CHECK(exact[i].vector[j] == doctest::Approx(task.gen_dirs[i][j]).epsilon(1e-12));

    auto noisy = synth::teacher_features(task, 0.1, 7);
    for (const auto& f : noisy) CHECK(std::fabs(norm2(f.vector) - 1.0) < 1e-12);

    // Regression baseline: worst-case teacher/generalizable cosine at the
    // default eps=0.1, D=32, seed 0 generation.
    double min_cos = 2.0;
    for (std::size_t i = 0; i < cfg.n_base + cfg.n_novel; ++i)
        min_cos = std::min(min_cos, dot(task.teacher[i].vector, task.gen_dirs[i]));
    CHECK(min_cos == doctest::Approx(0.7972236560).epsilon(1e-6));
}

TEST_CASE("no systematic spurious component in absent-mode base test split") {
    SynthConfig cfg;
    cfg.n_pool = 4;
    cfg.test_per_class = 200;
    auto task = synth::generate_task(cfg);
    for (std::size_t i = 0; i < cfg.n_base; ++i) {
        double mean = 0.0, var = 0.0;
        std::size_t n = 0;
        for (const auto& s : task.base_test)
            if (s.label == i) {
                mean += dot(s.z.vector, task.spur_dirs[i]);
                ++n;
            }
        mean /= static_cast<double>(n);
        for (const auto& s : task.base_test)
            if (s.label == i) {
                const double d = dot(s.z.vector, task.spur_dirs[i]) - mean;
                var += d * d;
            }
        var /= static_cast<double>(n - 1);
        const double se = std::sqrt(var / static_cast<double>(n));
        CHECK(std::fabs(mean) <= 3.0 * se + 1e-12);
    }
}

TEST_CASE("label sets and pools are disjoint by construction") {
    SynthConfig cfg;
    cfg.n_pool = 4;
    cfg.test_per_class = 3;
    auto task = synth::generate_task(cfg);
    for (const auto& s : task.train) CHECK(s.label < cfg.n_base);
    for (const auto& s : task.novel_test) CHECK(s.label < cfg.n_novel);
    CHECK(task.base_classes.size() == cfg.n_base);
    CHECK(task.novel_classes.size() == cfg.n_novel);
    CHECK(task.pool_classes.size() == cfg.n_pool);
    // Distinct embedding vectors across the three groups.
    for (const auto& b : task.base_classes)
        for (const auto& n : task.novel_classes) CHECK(b.vector != n.vector);
    for (const auto& b : task.base_classes)
        for (const auto& p : task.pool_classes) CHECK(b.vector != p.vector);
}

TEST_CASE("task save/load round-trip is bit-exact") {
    SynthConfig cfg;
    cfg.n_pool = 5;
    cfg.test_per_class = 4;
    cfg.spurious_test_mode = synth::SpuriousTestMode::Flipped;
    auto task = synth::generate_task(cfg);
    auto p1 = (std::filesystem::temp_directory_path() / "task_rt1.txt").string();
    auto p2 = (std::filesystem::temp_directory_path() / "task_rt2.txt").string();
    synth::save(task, p1);
    auto back = synth::load(p1);
    CHECK(back.gen_dirs == task.gen_dirs);
    CHECK(back.spur_dirs == task.spur_dirs);
    CHECK(back.pool_dirs == task.pool_dirs);
    CHECK(back.train.size() == task.train.size());
    for (std::size_t i = 0; i < task.train.size(); ++i) {
        CHECK(back.train[i].label == task.train[i].label);
        CHECK(back.train[i].z.vector == task.train[i].z.vector);
    }
    CHECK(back.cfg.beta == task.cfg.beta);
    CHECK(back.cfg.spurious_test_mode == task.cfg.spurious_test_mode);
    synth::save(back, p2);
    std::ifstream f1(p1, std::ios::binary), f2(p2, std::ios::binary);
    std::ostringstream s1, s2;
    s1 << f1.rdbuf();
    s2 << f2.rdbuf();
    CHECK(s1.str() == s2.str());
    std::remove(p1.c_str());
    std::remove(p2.c_str());
}
