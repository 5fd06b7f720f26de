#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "ganova/training.hpp"

using namespace ganova;
namespace fs = std::filesystem;

namespace {

fs::path work_dir() {
    fs::path dir = fs::temp_directory_path() / "ganova_training_test";
    fs::create_directories(dir);
    return dir;
}

TrainConfig tiny_config(const std::string& method) {
    TrainConfig cfg;
    cfg.method = method;
    cfg.dataset = "mixture";
    cfg.mixture_classes = 2;
    cfg.mixture_per_class = 30;
    cfg.m = 10;
    cfg.d_z = 4;
    cfg.k = method == "em" ? 2 : 1;
    cfg.iterations = 10;
    cfg.log_interval = 5;
    cfg.gen_hidden = {8};
    cfg.critic_hidden = {8};
    cfg.dropout = 0.0;
    cfg.alpha_g = 1e-3;
    cfg.alpha_d = 1e-3;
    return cfg;
}

Dataset tiny_dataset(const TrainConfig& cfg, std::uint64_t seed = 12345) {
    RandomStream rng(seed);
    return mixture_dataset(cfg.mixture_classes, cfg.mixture_per_class, cfg.mixture_sigma, rng);
}

std::string read_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    REQUIRE(in.good());
    return std::string(std::istreambuf_iterator<char>(in), {});
}

}  // namespace

TEST_CASE("config json round trip preserves every field") {
    TrainConfig cfg = tiny_config("em");
    cfg.seed = 77;
    cfg.lambda = 3.5;
    cfg.checkpoint_path = "x.ckpt";
    TrainConfig back = TrainConfig::from_json(cfg.to_json());
    CHECK(back.to_json() == cfg.to_json());
    CHECK(back.method == "em");
    CHECK(back.seed == 77);
    CHECK(back.lambda == 3.5);
    CHECK(back.gen_hidden == std::vector<std::size_t>{8});
}

TEST_CASE("unknown config keys are rejected by name") {
    CHECK_THROWS_WITH_AS(TrainConfig::from_json(R"({"learning_rate": 0.1})"),
                         doctest::Contains("learning_rate"), ConfigError);
    TrainConfig cfg;
    CHECK_THROWS_WITH_AS(cfg.apply_override("momentum", "0.9"), doctest::Contains("momentum"),
                         ConfigError);
}

TEST_CASE("apply_override parses typed values") {
    TrainConfig cfg;
    cfg.apply_override("k", "3");
    cfg.apply_override("alpha_d", "0.002");
    cfg.apply_override("method", "js");
    cfg.apply_override("gen_hidden", "[32, 16]");
    CHECK(cfg.k == 3);
    CHECK(cfg.alpha_d == 0.002);
    CHECK(cfg.method == "js");
    CHECK(cfg.gen_hidden == std::vector<std::size_t>{32, 16});
    CHECK_THROWS_AS(cfg.apply_override("k", "three"), ConfigError);
}

TEST_CASE("config validation rejects out-of-range values") {
    TrainConfig cfg;
    cfg.k = 0;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg = TrainConfig{};
    cfg.dropout = 1.0;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg = TrainConfig{};
    cfg.method = "wasserstein";
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg = TrainConfig{};
    cfg.dataset = "cifar";
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
}

TEST_CASE("model shapes: head width and default stacks per dataset") {
    TrainConfig cfg;
    cfg.dataset = "mnist";
    cfg.method = "js";
    ModelShapes js = make_model_shapes(cfg, 10, 784);
    CHECK(js.generator.widths == std::vector<std::size_t>{110, 256, 512, 1024, 784});
    CHECK(js.critic.widths == std::vector<std::size_t>{784, 512, 512, 512, 11});
    cfg.method = "em";
    ModelShapes em = make_model_shapes(cfg, 10, 784);
    CHECK(em.critic.widths.back() == 10);

    cfg.dataset = "mixture";
    ModelShapes mix = make_model_shapes(cfg, 4, 2);
    CHECK(mix.generator.widths == std::vector<std::size_t>{104, 64, 64, 2});
    CHECK(mix.critic.widths == std::vector<std::size_t>{2, 64, 64, 4});
}

TEST_CASE("metrics csv: header, em populates w_estimate, js leaves it empty") {
    CHECK(metrics_csv_header() == "iter,d_loss,g_loss,w_estimate,penalty,seconds");
    MetricsRow em_row{100, -0.5, 0.25, 0.5, 0.01, 1.5};
    std::string em_line = metrics_csv_line(em_row);
    CHECK(em_line == "100,-0.5,0.25,0.5,0.01,1.5");
    MetricsRow js_row{100, 0.75, 2.5, std::nullopt, 0.0, 1.5};
    CHECK(metrics_csv_line(js_row) == "100,0.75,2.5,,0,1.5");

    fs::path p = work_dir() / "metrics_roundtrip.csv";
    {
        std::ofstream out(p);
        out << metrics_csv_header() << '\n' << em_line << '\n' << metrics_csv_line(js_row) << '\n';
    }
    std::vector<MetricsRow> rows = read_metrics_csv(p.string());
    REQUIRE(rows.size() == 2);
    CHECK(rows[0].w_estimate.has_value());
    CHECK(*rows[0].w_estimate == 0.5);
    CHECK_FALSE(rows[1].w_estimate.has_value());
    CHECK(rows[1].g_loss == 2.5);
}

TEST_CASE("checkpoint round trip is bit exact") {
    TrainConfig cfg = tiny_config("em");
    Dataset data = tiny_dataset(cfg);
    TrainResult run = train(cfg, data);
    CHECK_FALSE(run.aborted);
    CHECK(run.checkpoint.iteration == 10);

    fs::path p = work_dir() / "roundtrip.ckpt";
    save_checkpoint(run.checkpoint, p.string());
    CheckpointBundle back = load_checkpoint(p.string());

    CHECK(back.iteration == run.checkpoint.iteration);
    CHECK(back.rng_state == run.checkpoint.rng_state);
    CHECK(back.d_x == 2);
    CHECK(back.n_classes == 2);
    CHECK(back.config.to_json() == cfg.to_json());
    REQUIRE(back.generator.layer_count() == run.checkpoint.generator.layer_count());
    for (std::size_t i = 0; i < back.generator.layer_count(); ++i) {
        CHECK(back.generator.weights[i].v == run.checkpoint.generator.weights[i].v);
        CHECK(back.generator.biases[i].v == run.checkpoint.generator.biases[i].v);
    }
    for (std::size_t i = 0; i < back.critic.layer_count(); ++i) {
        CHECK(back.critic.weights[i].v == run.checkpoint.critic.weights[i].v);
    }
    CHECK(back.adam_g.t == run.checkpoint.adam_g.t);
    CHECK(back.adam_d.t == run.checkpoint.adam_d.t);
    CHECK(back.adam_d.v_weights[0].v == run.checkpoint.adam_d.v_weights[0].v);
    CHECK(back.batch_state.permutation == run.checkpoint.batch_state.permutation);
    CHECK(back.batch_state.cursor == run.checkpoint.batch_state.cursor);

    // saving the loaded bundle reproduces the file byte for byte
    fs::path p2 = work_dir() / "roundtrip2.ckpt";
    save_checkpoint(back, p2.string());
    CHECK(read_file(p) == read_file(p2));
}

TEST_CASE("checkpoint corruption surfaces distinct parse errors") {
    TrainConfig cfg = tiny_config("js");
    Dataset data = tiny_dataset(cfg);
    TrainResult run = train(cfg, data);
    fs::path good = work_dir() / "good.ckpt";
    save_checkpoint(run.checkpoint, good.string());
    std::string bytes = read_file(good);

    SUBCASE("bad magic") {
        std::string bad = bytes;
        bad[0] = 'X';
        fs::path p = work_dir() / "badmagic.ckpt";
        std::ofstream(p, std::ios::binary) << bad;
        try {
            load_checkpoint(p.string());
            FAIL("expected ParseError");
        } catch (const ParseError& e) {
            CHECK(e.kind() == ParseError::Kind::BadMagic);
        }
    }
    SUBCASE("bad version") {
        std::string bad = bytes;
        bad[4] = 9;
        fs::path p = work_dir() / "badversion.ckpt";
        std::ofstream(p, std::ios::binary) << bad;
        try {
            load_checkpoint(p.string());
            FAIL("expected ParseError");
        } catch (const ParseError& e) {
            CHECK(e.kind() == ParseError::Kind::BadVersion);
        }
    }
    SUBCASE("truncated body") {
        fs::path p = work_dir() / "truncated.ckpt";
        std::ofstream(p, std::ios::binary) << bytes.substr(0, bytes.size() / 2);
        try {
            load_checkpoint(p.string());
            FAIL("expected ParseError");
        } catch (const ParseError& e) {
            CHECK(e.kind() == ParseError::Kind::Truncated);
        }
    }
    SUBCASE("missing file") {
        CHECK_THROWS_AS(load_checkpoint((work_dir() / "absent.ckpt").string()), DataError);
    }
}

TEST_CASE("same seed gives bit-identical parameters, different seed diverges") {
    for (const char* method : {"js", "em"}) {
        CAPTURE(method);
        TrainConfig cfg = tiny_config(method);
        cfg.seed = 9;
        TrainResult a = train(cfg, tiny_dataset(cfg));
        TrainResult b = train(cfg, tiny_dataset(cfg));
        CHECK(a.checkpoint.generator.weights[0].v == b.checkpoint.generator.weights[0].v);
        CHECK(a.checkpoint.critic.weights[1].v == b.checkpoint.critic.weights[1].v);
        CHECK(a.checkpoint.rng_state == b.checkpoint.rng_state);

        cfg.seed = 10;
        TrainResult c = train(cfg, tiny_dataset(cfg));
        CHECK(a.checkpoint.generator.weights[0].v != c.checkpoint.generator.weights[0].v);
    }
}

TEST_CASE("resumed training is bit exact against an uninterrupted run") {
    for (const char* method : {"js", "em"}) {
        CAPTURE(method);
        TrainConfig full_cfg = tiny_config(method);
        full_cfg.iterations = 12;
        full_cfg.log_interval = 3;
        Dataset data = tiny_dataset(full_cfg);
        TrainResult full = train(full_cfg, data);

        TrainConfig half_cfg = full_cfg;
        half_cfg.iterations = 6;
        TrainResult half = train(half_cfg, data);
        CHECK(half.checkpoint.iteration == 6);

        // resume to 12 using the mid-run checkpoint; batch iterator state makes
        // the continuation land mid-epoch exactly where the full run was
        TrainResult resumed = train(full_cfg, data, &half.checkpoint);
        CHECK(resumed.checkpoint.iteration == 12);
        for (std::size_t i = 0; i < full.checkpoint.generator.layer_count(); ++i) {
            CHECK(resumed.checkpoint.generator.weights[i].v ==
                  full.checkpoint.generator.weights[i].v);
            CHECK(resumed.checkpoint.critic.weights[i].v == full.checkpoint.critic.weights[i].v);
        }
        CHECK(resumed.checkpoint.rng_state == full.checkpoint.rng_state);
        CHECK(resumed.checkpoint.batch_state.cursor == full.checkpoint.batch_state.cursor);
        CHECK(resumed.checkpoint.adam_g.t == full.checkpoint.adam_g.t);
    }
}

TEST_CASE("critic/generator update ratio follows k") {
    TrainConfig cfg = tiny_config("em");
    cfg.k = 5;
    cfg.iterations = 8;
    TrainResult run = train(cfg, tiny_dataset(cfg));
    CHECK(run.checkpoint.adam_d.t == 40);  // k per outer iteration
    CHECK(run.checkpoint.adam_g.t == 8);

    cfg = tiny_config("js");
    cfg.k = 1;
    cfg.iterations = 8;
    run = train(cfg, tiny_dataset(cfg));
    CHECK(run.checkpoint.adam_d.t == 8);
    CHECK(run.checkpoint.adam_g.t == 8);
}

TEST_CASE("train writes metrics and checkpoint files; js leaves w_estimate empty") {
    TrainConfig cfg = tiny_config("js");
    cfg.metrics_path = (work_dir() / "js_metrics.csv").string();
    cfg.checkpoint_path = (work_dir() / "js_train.ckpt").string();
    TrainResult run = train(cfg, tiny_dataset(cfg));
    CHECK_FALSE(run.aborted);

    std::vector<MetricsRow> rows = read_metrics_csv(cfg.metrics_path);
    REQUIRE(rows.size() == 2);  // iterations 5 and 10
    CHECK(rows[0].iter == 5);
    CHECK(rows[1].iter == 10);
    for (const MetricsRow& row : rows) {
        CHECK_FALSE(row.w_estimate.has_value());
        CHECK(std::isfinite(row.d_loss));
        CHECK(std::isfinite(row.g_loss));
        CHECK(row.seconds >= 0.0);
    }

    CheckpointBundle ck = load_checkpoint(cfg.checkpoint_path);
    CHECK(ck.iteration == 10);
}

TEST_CASE("em metrics populate w_estimate and penalty") {
    TrainConfig cfg = tiny_config("em");
    cfg.metrics_path = (work_dir() / "em_metrics.csv").string();
    TrainResult run = train(cfg, tiny_dataset(cfg));
    std::vector<MetricsRow> rows = read_metrics_csv(cfg.metrics_path);
    REQUIRE(rows.size() == 2);
    for (const MetricsRow& row : rows) {
        CHECK(row.w_estimate.has_value());
        CHECK(std::isfinite(*row.w_estimate));
        CHECK(row.penalty >= 0.0);
    }
    CHECK(run.metrics.size() == rows.size());
}

TEST_CASE("non-finite loss aborts without clobbering the last good checkpoint") {
    TrainConfig cfg = tiny_config("em");
    cfg.checkpoint_path = (work_dir() / "abort.ckpt").string();
    cfg.metrics_path = (work_dir() / "abort_metrics.csv").string();
    TrainResult good = train(cfg, tiny_dataset(cfg));
    CHECK_FALSE(good.aborted);
    std::string good_bytes = read_file(cfg.checkpoint_path);

    // resume with an absurd critic step size so scores overflow to inf
    TrainConfig blowup = cfg;
    blowup.iterations = 200;
    blowup.alpha_d = 1e160;
    TrainResult bad = train(blowup, tiny_dataset(cfg), &good.checkpoint);
    CHECK(bad.aborted);
    CHECK(bad.abort_iter > 10);
    REQUIRE_FALSE(bad.metrics.empty());
    bool nonfinite = !std::isfinite(bad.metrics.back().d_loss) ||
                     !std::isfinite(bad.metrics.back().g_loss);
    CHECK(nonfinite);

    // the on-disk checkpoint still holds the pre-abort state
    CHECK(read_file(cfg.checkpoint_path) == good_bytes);
}

TEST_CASE("resume rejects incompatible configs and datasets") {
    TrainConfig cfg = tiny_config("em");
    Dataset data = tiny_dataset(cfg);
    TrainResult run = train(cfg, data);

    TrainConfig other = cfg;
    other.method = "js";
    other.k = 1;
    CHECK_THROWS_AS(train(other, data, &run.checkpoint), ConfigError);

    TrainConfig wider = cfg;
    wider.mixture_classes = 3;
    Dataset other_data = tiny_dataset(wider);
    CHECK_THROWS_AS(train(cfg, other_data, &run.checkpoint), ConfigError);
}

TEST_CASE("batch size larger than the dataset is rejected") {
    TrainConfig cfg = tiny_config("js");
    cfg.m = 1000;
    CHECK_THROWS_AS(train(cfg, tiny_dataset(cfg)), ConfigError);
}
