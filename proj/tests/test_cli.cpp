#include <gtest/gtest.h>

#include <fstream>

#include "helpers.hpp"

using namespace testing_support;

namespace {

void write(const fs::path& p, const std::string& text) { vocadapt::write_file(p, text); }

std::size_t line_count(const fs::path& p) {
    const auto text = vocadapt::read_file(p);
    return static_cast<std::size_t>(std::count(text.begin(), text.end(), '\n'));
}

}  // namespace

TEST(Cli, UsageErrors) {
    EXPECT_EQ(run_cli({}), 1);
    EXPECT_EQ(run_cli({"bogus"}), 1);
    EXPECT_EQ(run_cli({"schedule"}), 1);  // missing --out
    EXPECT_EQ(run_cli({"schedule", "--preset", "fast", "--out", "x"}), 1);
    EXPECT_EQ(run_cli({"--version"}), 0);
}

TEST(Cli, ScheduleCsv) {
    TempDir dir("sched");
    ASSERT_EQ(run_cli({"schedule", "--preset", "gams", "--steps", "13413", "--every", "500", "--out",
                       (dir / "s.csv").string(), "--report", (dir / "s.txt").string()}),
              0);
    const auto text = vocadapt::read_file(dir / "s.csv");
    EXPECT_TRUE(text.starts_with("step,lr,trainable_groups\n0,0,embedding+output\n"));
    EXPECT_NE(text.find("\n1500,"), std::string::npos);
    EXPECT_NE(text.find("\n2000,2e-04,embedding+output+inner\n"), std::string::npos);
    EXPECT_TRUE(text.ends_with("13413,2e-05,embedding+output+inner\n"));
    EXPECT_EQ(report_value(dir / "s.txt", "total_steps"), "13413");
    EXPECT_EQ(report_value(dir / "s.txt", "freeze"), "steps(1500)");
    EXPECT_EQ(report_value(dir / "s.txt", "config.every"), "500");
    EXPECT_FALSE(report_value(dir / "s.txt", "version").empty());
    EXPECT_TRUE(report_value(dir / "s.txt", "input.output").starts_with("fnv1a64:"));
}

TEST(Cli, ConfigFileAndOverrides) {
    TempDir dir("cfg");
    write(dir / "run.ini", "# schedule settings\nseed = 3\n[schedule]\npreset = quality\nevery = 1000\n");
    const auto out = (dir / "a.csv").string();
    ASSERT_EQ(run_cli({"--config", (dir / "run.ini").string(), "schedule", "--out", out, "--report",
                       (dir / "a.txt").string()}),
              0);
    EXPECT_EQ(line_count(out), 1u + 11u + 1u);  // header, 0..10000, 10050
    EXPECT_EQ(report_value(dir / "a.txt", "config.seed"), "3");
    EXPECT_EQ(report_value(dir / "a.txt", "config.preset"), "quality");

    ASSERT_EQ(run_cli({"--config", (dir / "run.ini").string(), "schedule", "--every", "5000", "--out", out}), 0);
    EXPECT_EQ(line_count(out), 1u + 3u + 1u);

    write(dir / "bad.ini", "[schedule]\neverry = 3\n");
    EXPECT_EQ(run_cli({"--config", (dir / "bad.ini").string(), "schedule", "--out", out}), 2);
    write(dir / "bad2.ini", "colour = red\n");
    EXPECT_EQ(run_cli({"--config", (dir / "bad2.ini").string(), "schedule", "--out", out}), 2);
}

TEST(Cli, SariReport) {
    TempDir dir("sari");
    write(dir / "in.txt", "a b c\nthe cat sat on the mat\n");
    write(dir / "cand.txt", "a b\nthe cat sat on the mat\n");
    write(dir / "ref.txt", "a c\nthe cat sat on the mat\n");
    const auto out = dir / "sari.txt";
    ASSERT_EQ(run_cli({"sari", "--input", (dir / "in.txt").string(), "--candidates", (dir / "cand.txt").string(),
                       "--references", (dir / "ref.txt").string(), "--orders", "1", "--out", out.string(), "--table",
                       (dir / "t.tsv").string()}),
              0);
    EXPECT_EQ(std::stod(report_value(out, "sari")), 75.0);
    EXPECT_EQ(report_value(out, "sentences"), "2");
    EXPECT_FALSE(report_value(out, "sari_4gram").empty());
    EXPECT_FALSE(report_value(out, "sari_orders_1_4.lo").empty());
    EXPECT_TRUE(report_value(out, "input.references.0").starts_with("fnv1a64:"));
    EXPECT_EQ(line_count(dir / "t.tsv"), 3u);

    write(dir / "short.txt", "a\n");
    EXPECT_EQ(run_cli({"sari", "--input", (dir / "in.txt").string(), "--candidates", (dir / "short.txt").string(),
                       "--references", (dir / "ref.txt").string(), "--out", out.string()}),
              2);
}

TEST(Cli, ScoreReport) {
    TempDir dir("score");
    std::string jsonl;
    const char* outs[] = {"True", "false.", "maybe", "TRUE", "true", "I don't know", "false", "False", "", "true"};
    const char* gold[] = {"true", "false", "true", "false", "true", "false", "false", "true", "true", "true"};
    for (int i = 0; i < 10; ++i)
        jsonl += "{\"id\": \"q" + std::to_string(i) + "\", \"gold\": \"" + gold[i] + "\", \"raw_output\": \"" + outs[i] +
                 "\"}\n";
    write(dir / "r.jsonl", jsonl);
    const auto out = dir / "score.txt";
    ASSERT_EQ(run_cli({"--seed", "4", "score", "--task", "boolq", "--records", (dir / "r.jsonl").string(), "--bootstrap",
                       "2000", "--out", out.string()}),
              0);
    EXPECT_EQ(report_value(out, "records"), "10");
    EXPECT_EQ(report_value(out, "valid"), "7");
    EXPECT_DOUBLE_EQ(std::stod(report_value(out, "invalid_rate")), 0.3);
    // valid: q0 ok, q1 ok, q3 wrong, q4 ok, q6 ok, q7 wrong, q9 ok
    EXPECT_NEAR(std::stod(report_value(out, "accuracy")), 5.0 / 7.0, 1e-9);
    EXPECT_EQ(report_value(out, "few_shot_k"), "3");
    EXPECT_EQ(report_value(out, "f1.method"), "quantile-bootstrap");
    EXPECT_EQ(report_value(out, "config.seed"), "4");

    const std::string first = vocadapt::read_file(out);
    ASSERT_EQ(run_cli({"--seed", "4", "--threads", "3", "score", "--task", "boolq", "--records",
                       (dir / "r.jsonl").string(), "--bootstrap", "2000", "--out", out.string()}),
              0);
    EXPECT_EQ(vocadapt::read_file(out), first);

    write(dir / "none.jsonl", "{\"id\": \"a\", \"gold\": \"true\", \"raw_output\": \"perhaps\"}\n");
    EXPECT_EQ(run_cli({"score", "--task", "boolq", "--records", (dir / "none.jsonl").string(), "--out", out.string()}),
              2);
    write(dir / "broken.jsonl", "{\"id\": 1}\n");
    EXPECT_EQ(run_cli({"score", "--task", "boolq", "--records", (dir / "broken.jsonl").string(), "--out", out.string()}),
              2);
}

TEST(Cli, FocusWithoutOverlapFails) {
    TempDir dir("focus");
    vocadapt::write_wvec(dir / "src.wvec",
                         vocadapt::transfer::random_init({"<s>", "</s>", "<pad>", "<unk>", "▁dog", "▁cat"}, 4, 1, 0, 1));
    write(dir / "tgt.txt", "<s>\n</s>\n<pad>\n<unk>\n▁pes\n▁mačka\n");
    write(dir / "space.txt", "2 2\n␣pes 1 0\n␣mačka 0 1\n");
    EXPECT_EQ(run_cli({"transfer", "--method", "focus", "--src-emb", (dir / "src.wvec").string(), "--tgt-vocab",
                       (dir / "tgt.txt").string(), "--space-tgt", (dir / "space.txt").string(), "--out",
                       (dir / "o.wvec").string()}),
              2);
    EXPECT_FALSE(fs::exists(dir / "o.wvec"));
    // a shared token makes the same call succeed
    write(dir / "tgt.txt", "<s>\n</s>\n<pad>\n<unk>\n▁pes\n▁cat\n");
    write(dir / "space.txt", "2 2\n␣pes 1 0\n␣cat 0 1\n");
    EXPECT_EQ(run_cli({"transfer", "--method", "focus", "--src-emb", (dir / "src.wvec").string(), "--tgt-vocab",
                       (dir / "tgt.txt").string(), "--space-tgt", (dir / "space.txt").string(), "--out",
                       (dir / "o.wvec").string()}),
              0);
    EXPECT_EQ(report_value(dir / "o.wvec.report.txt", "overlap_size"), "1");
    EXPECT_TRUE(report_value(dir / "o.wvec.report.txt", "input.src_emb").starts_with("fnv1a64:"));
}

TEST(Cli, MissingInputIsDataError) {
    TempDir dir("missing");
    EXPECT_EQ(run_cli({"clean", "--in", (dir / "nope").string(), "--out", (dir / "o").string()}), 2);
}
