#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include "mineco/config.hpp"
#include "mineco/csv.hpp"
#include "mineco/errors.hpp"

using namespace mineco;

TEST(Config, EmptyTextGivesDefaults) {
    const auto c = parse_config("");
    EXPECT_EQ(c.symbols, 16u);
    EXPECT_EQ(c.block_length, 1u);
    EXPECT_EQ(c.tnet_width, 20u);
    EXPECT_EQ(c.stopping.min_errors, 100u);
    EXPECT_EQ(c.stopping.max_symbols, 10'000'000u);
    EXPECT_EQ(c.eval_grid_db.size(), 9u);
    EXPECT_DOUBLE_EQ(c.rate_bits(), 4.0);
    EXPECT_NEAR(c.train_snr.nominal_variance(), 0.049881, 1e-6);
}

TEST(Config, ParsesKeysAndComments) {
    const auto c = parse_config(
        "# a comment\n"
        "symbols = 32   # trailing\n"
        "block_length = 2\n"
        "estimator = fdiv\n"
        "train_snr = ebn0:14:18\n"
        "cycles = 100x1000@0.01, 1000x2000@0.001\n"
        "eval_grid = 0:6:2\n"
        "seed = 42\n"
        "\n");
    EXPECT_EQ(c.symbols, 32u);
    EXPECT_EQ(c.block_length, 2u);
    EXPECT_EQ(c.estimator, EstimatorKind::f_divergence);
    EXPECT_EQ(c.train_snr.mode, TrainingSnr::Mode::uniform_range);
    EXPECT_DOUBLE_EQ(c.train_snr.lo, 14.0);
    EXPECT_DOUBLE_EQ(c.train_snr.rate, 2.5);
    ASSERT_EQ(c.schedule.cycles.size(), 2u);
    EXPECT_EQ(c.schedule.cycles[1].iterations, 2000u);
    EXPECT_EQ(c.eval_grid_db, (std::vector<double>{0, 2, 4, 6}));
    EXPECT_EQ(c.seed, 42u);
}

TEST(Config, RoundTrip) {
    auto c = parse_config("symbols = 64\nmode = ce_end_to_end\ntrain_snr = ebn0:17:21\ntrain_snr_mode = ramp\n"
                          "cycles = none\nencoder_hidden = 40,40\neval_grid = 1.5,2.25\nearly_stop = true\n");
    const auto text = to_config_text(c);
    const auto back = parse_config(text);
    EXPECT_EQ(to_config_text(back), text);
    EXPECT_EQ(back.mode, TrainingMode::ce_end_to_end);
    EXPECT_EQ(back.train_snr.mode, TrainingSnr::Mode::ramp);
    EXPECT_TRUE(back.schedule.cycles.empty());
    EXPECT_EQ(back.encoder_hidden, (std::vector<std::size_t>{40, 40}));
    EXPECT_TRUE(back.schedule.early_stop);
}

TEST(Config, Rejections) {
    EXPECT_THROW(parse_config("symbol = 16\n"), Error);
    EXPECT_THROW(parse_config("symbols = 12\n"), InvalidSpecError);
    EXPECT_THROW(parse_config("symbols = 1\n"), InvalidSpecError);
    EXPECT_THROW(parse_config("block_length = 0\n"), InvalidSpecError);
    EXPECT_THROW(parse_config("min_errors = 0\n"), InvalidSpecError);
    EXPECT_THROW(parse_config("eval_grid = \n"), Error);
    EXPECT_THROW(parse_config("train_snr = ebn0:14:10\n"), InvalidSpecError);
    EXPECT_THROW(parse_config("symbols 16\n"), Error);
    EXPECT_THROW(parse_config("symbols = abc\n"), Error);
}

TEST(Config, GridForms) {
    EXPECT_EQ(parse_grid("4:12:1").size(), 9u);
    EXPECT_EQ(parse_grid("4:12:1").back(), 12.0);
    EXPECT_EQ(parse_grid("3"), (std::vector<double>{3}));
    EXPECT_EQ(parse_grid("-2,0.5"), (std::vector<double>{-2, 0.5}));
    EXPECT_THROW(parse_grid("4:2:1"), Error);
    EXPECT_THROW(parse_grid("0:1:0"), Error);
    EXPECT_EQ(parse_size_list("2,4,6"), (std::vector<std::size_t>{2, 4, 6}));
}

TEST(Config, TrainingSnrText) {
    EXPECT_EQ(parse_training_snr("snr:1", 4).scale, TrainingSnr::Scale::snr_linear);
    EXPECT_DOUBLE_EQ(parse_training_snr("variance:0", 4).nominal_variance(), 0.0);
    EXPECT_NEAR(parse_training_snr("snr_db:10", 4).nominal_variance(), 0.1, 1e-15);
    for (const char* t : {"ebn0:7", "ebn0:10:14", "snr:2", "variance:0.25"})
        EXPECT_EQ(format_training_snr(parse_training_snr(t, 4)), t);
    EXPECT_THROW(parse_training_snr("loud:3", 4), Error);
}

TEST(Csv, NumbersRoundTripExactly) {
    const auto path = (std::filesystem::temp_directory_path() / "mineco_csv_test.csv").string();
    {
        CsvWriter w(path, {"a", "b", "c"});
        w.row(0.1, std::size_t{7}, true);
        w.row(1.0 / 3.0, std::size_t{0}, false);
        EXPECT_THROW(w.row(1.0), ShapeError);
    }
    const auto doc = read_csv(path, {"a", "b", "c"});
    ASSERT_EQ(doc.rows.size(), 2u);
    EXPECT_EQ(doc.rows[0][0], 0.1);
    EXPECT_EQ(doc.rows[1][0], 1.0 / 3.0);
    EXPECT_EQ(doc.rows[0][2], 1.0);
    EXPECT_THROW(read_csv(path, {"a", "b"}), ParseError);
    std::ofstream(path) << "a,b\n1,x\n";
    EXPECT_THROW(read_csv(path), ParseError);
    std::filesystem::remove(path);
    EXPECT_THROW(read_csv(path), Error);
}
