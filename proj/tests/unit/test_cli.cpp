#include <gtest/gtest.h>

#include "support/support.hpp"

using namespace samprio;
using testsupport::run;
using testsupport::TempDir;

namespace {

const std::string kCli = SAMPRIO_CLI;

std::string q(const std::string& s) { return "'" + s + "'"; }

// Writes small core/fine-tuning embedding files from the synthetic generator.
void write_inputs(const TempDir& dir, std::size_t dims = 4) {
    auto spec = default_synthetic_spec(dims);
    spec.core_n = 300;
    spec.ft_n = 220;
    spec.novel_sizes = {10, 20};
    spec.seed = 1;
    const auto d = generate_synthetic(spec);
    save_embeddings(d.core, dir.file("core.emb"));
    save_embeddings(d.finetune, dir.file("ft.emb"));
}

std::size_t line_count(const std::string& path) {
    const auto text = testsupport::slurp(path);
    return static_cast<std::size_t>(std::count(text.begin(), text.end(), '\n'));
}

} // namespace

TEST(Cli, UsageErrors) {
    EXPECT_EQ(run(kCli), 1);
    EXPECT_EQ(run(kCli + " frobnicate"), 1);
    EXPECT_EQ(run(kCli + " --set nope=1 simulate"), 1);
    EXPECT_EQ(run(kCli + " --help"), 0);
}

TEST(Cli, FitThenRank) {
    TempDir dir("cli");
    write_inputs(dir);
    const std::string base = kCli + " --out-dir " + q(dir.file("out"));
    ASSERT_EQ(run(base + " fit --core " + q(dir.file("core.emb"))), 0);
    for (const char* f : {"pca.bin", "clusters.bin", "predictor.bin"}) EXPECT_TRUE(testsupport::fs::exists(dir.file(std::string("out/") + f)));
    const auto pca = testsupport::slurp(dir.file("out/pca.bin"));
    const auto clu = testsupport::slurp(dir.file("out/clusters.bin"));
    ASSERT_EQ(run(base + " fit --core " + q(dir.file("core.emb"))), 0);
    EXPECT_EQ(testsupport::slurp(dir.file("out/pca.bin")), pca);
    EXPECT_EQ(testsupport::slurp(dir.file("out/clusters.bin")), clu);

    ASSERT_EQ(run(base + " rank --finetune " + q(dir.file("ft.emb"))), 0);
    EXPECT_EQ(line_count(dir.file("out/queue.csv")), 221u);
    const auto bps_queue = testsupport::slurp(dir.file("out/queue.csv"));
    ASSERT_EQ(run(base + " rank --strategy mps --finetune " + q(dir.file("ft.emb"))), 0);
    EXPECT_EQ(line_count(dir.file("out/queue.csv")), 221u);
    EXPECT_NE(testsupport::slurp(dir.file("out/queue.csv")), bps_queue);
}

TEST(Cli, DataErrors) {
    TempDir dir("cli");
    write_inputs(dir);
    const std::string base = kCli + " --out-dir " + q(dir.file("out"));
    EXPECT_EQ(run(base + " fit --core " + q(dir.file("missing.emb"))), 2);

    ASSERT_EQ(run(base + " fit --core " + q(dir.file("core.emb"))), 0);
    TempDir other("cli");
    write_inputs(other, 6);
    EXPECT_EQ(run(base + " rank --finetune " + q(other.file("ft.emb"))), 2);

    EXPECT_EQ(run(base + " --set sim.ft_n=300 --set sim.budgets=400 simulate"), 2);
}

TEST(Cli, SimulateSmallAndReport) {
    TempDir dir("cli");
    testsupport::spit(dir.file("small.cfg"),
                      "sim.dims = 3\nsim.core_n = 200\nsim.ft_n = 220\nsim.novel_sizes = 10,20\n"
                      "sim.budgets = 50:200:50\nsim.seeds = 2\n");
    const std::string base = kCli + " --config " + q(dir.file("small.cfg")) + " --out-dir " + q(dir.file("out"));
    ASSERT_EQ(run(base + " --seed 3 simulate"), 0);
    EXPECT_EQ(line_count(dir.file("out/sweep.csv")), 1u + 4u * 3u * 2u);
    EXPECT_TRUE(testsupport::fs::exists(dir.file("out/summary.txt")));
    const auto report = testsupport::slurp(dir.file("out/report.csv"));
    testsupport::fs::remove(dir.file("out/report.csv"));
    ASSERT_EQ(run(base + " report"), 0);
    EXPECT_EQ(testsupport::slurp(dir.file("out/report.csv")), report);
}

TEST(Cli, ScatterSynthetic) {
    TempDir dir("cli");
    ASSERT_EQ(run(kCli + " --out-dir " + q(dir.path().string()) +
                  " --set sim.dims=3 --set sim.core_n=100 --set sim.ft_n=120 --set sim.novel_sizes=5 scatter"),
              0);
    EXPECT_EQ(line_count(dir.file("scatter.csv")), 221u);
}

TEST(Cli, DumpConfigReloads) {
    TempDir dir("cli");
    ASSERT_EQ(run(kCli + " --seed 77 --set knn.k=9 --set sim.budgets=10,20 --dump-config " + q(dir.file("a.cfg"))), 0);
    ASSERT_EQ(run(kCli + " --config " + q(dir.file("a.cfg")) + " --dump-config " + q(dir.file("b.cfg"))), 0);
    EXPECT_EQ(testsupport::slurp(dir.file("a.cfg")), testsupport::slurp(dir.file("b.cfg")));
    const auto c = load_config(dir.file("a.cfg"));
    EXPECT_EQ(c.pipeline.seed, 77u);
    EXPECT_EQ(c.pipeline.knn_k, 9u);
    EXPECT_EQ(c.sim.budgets, (std::vector<std::size_t>{10, 20}));
}
