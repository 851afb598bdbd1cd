#include <gtest/gtest.h>

#include "pipeline.hpp"

using namespace testing_support;

TEST(Pipeline, ByteIdenticalAcrossThreadCounts) {
    TempDir dir("pipe");
    const auto one = run_pipeline(dir / "t1", 1);
    const auto eight = run_pipeline(dir / "t8", 8);
    ASSERT_EQ(one.failed_step, -1);
    ASSERT_EQ(eight.failed_step, -1);
    ASSERT_EQ(one.files.size(), eight.files.size());
    for (const auto& [name, bytes] : one.files) {
        ASSERT_TRUE(eight.files.count(name)) << name;
        EXPECT_TRUE(bytes == eight.files.at(name)) << name << " differs";
    }
    for (const char* f : {"focus.wvec", "focus.output.wvec", "wechsel.wvec", "tgt.bpe", "dedup_sl.report.txt",
                          "focus.wvec.report.txt", "eval_tokenizer.txt", "schedule.csv"})
        EXPECT_TRUE(one.files.count(f)) << f;

    const auto focus = vocadapt::read_wvec(dir / "t1/focus.wvec");
    EXPECT_EQ(focus, vocadapt::read_wvec(dir / "t1/focus.output.wvec"));
    EXPECT_EQ(focus.vocab(), vocadapt::load_vocab(dir / "t1/tgt.bpe"));
    EXPECT_GT(std::stoul(report_value(dir / "t1/focus.wvec.report.txt", "overlap_size")), 0u);
}

TEST(Pipeline, RerunIsIdentical) {
    TempDir dir("pipe2");
    const auto a = run_pipeline(dir / "a", 4, 600);
    const auto b = run_pipeline(dir / "b", 4, 600);
    ASSERT_EQ(a.failed_step, -1);
    EXPECT_TRUE(a.files == b.files);
}
