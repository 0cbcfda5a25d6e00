#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <unistd.h>
#include <fstream>
#include <string>
#include <vector>

#include "seatrack/checkpoint.hpp"
#include "seatrack/model.hpp"
#include "seatrack/pipeline.hpp"

using namespace seatrack;

namespace {

namespace fs = std::filesystem;

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("seatrack-test-" + std::to_string(::getpid()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

Tensor random_input(std::size_t batch, std::uint64_t seed) {
  Rng rng(seed);
  return rng_uniform<float>(rng, {batch, 4, 1}, -2.0, 2.0);
}

Checkpoint sample_checkpoint(std::uint64_t seed) {
  ArchParams p;
  p.conv_filters = 4;
  p.conv_kernel = 5;
  p.conv_stride = 3;
  p.lstm_hidden = 4;
  Model model(cnn_lstm_spec(3, p), seed);
  ScalerParams scaler;
  scaler.mean = {37.0, 23.0, 50.0, 180.0};
  scaler.stdev = {0.5, 0.25, 30.0, 100.0};
  LabelMap labels = LabelMap::from_vessel_ids({"vessel 1", "vessel 2", "vessel 3"});
  return make_checkpoint(model, scaler, labels);
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(in), {});
}

void spit(const fs::path& p, const std::string& bytes) {
  std::ofstream out(p, std::ios::binary);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

}  // namespace

TEST_CASE("the full stack has exactly the published parameter budget") {
  Model model(cnn_lstm_spec(23, ArchParams{}), 1);
  REQUIRE(model.layer_count() == 6);
  CHECK(model.layer(0).param_count() == 192);   // conv: 32*(5*1) + 32
  CHECK(model.layer(1).param_count() == 8320);  // lstm: 4*((32+32)*32 + 32)
  CHECK(model.layer(2).param_count() == 0);     // dropout
  CHECK(model.layer(3).param_count() == 8320);
  CHECK(model.layer(4).param_count() == 0);
  CHECK(model.layer(5).param_count() == 759);   // dense: 32*23 + 23
  CHECK(model.param_count() == 17591);
}

TEST_CASE("baseline parameter budgets follow from their layer shapes") {
  Model lstm(lstm_baseline_spec(23, ArchParams{}), 1);
  // First lstm consumes the raw single channel: 4*((1+32)*32 + 32) = 4352.
  CHECK(lstm.layer(0).param_count() == 4352);
  CHECK(lstm.param_count() == 4352 + 8320 + 759);
  CHECK(lstm.param_count() == 13431);

  Model cnn(cnn_baseline_spec(23, ArchParams{}), 1);
  CHECK(cnn.layer(0).param_count() == 192);
  // conv output [B,2,32] flattens to 64: dense1 = 64*32+32, head = 32*23+23.
  CHECK(cnn.param_count() == 192 + (64 * 32 + 32) + 759);

  Model ann(ann_baseline_spec(23, ArchParams{}), 1);
  CHECK(ann.param_count() == (4 * 64 + 64) + (64 * 32 + 32) + (32 * 23 + 23));
}

TEST_CASE("the class count only resizes the head") {
  Model m5(cnn_lstm_spec(5, ArchParams{}), 1);
  CHECK(m5.layer(5).param_count() == 32 * 5 + 5);
  CHECK(m5.param_count() == 192 + 8320 + 8320 + 165);
}

TEST_CASE("layer output shapes match the published architecture") {
  Model model(cnn_lstm_spec(23, ArchParams{}), 1);
  Shape shape = {7, 4, 1};
  shape = model.layer(0).output_shape(shape);
  CHECK(shape == Shape{7, 2, 32});  // conv, stride 3 over length 4
  shape = model.layer(1).output_shape(shape);
  CHECK(shape == Shape{7, 2, 32});  // lstm, sequences kept
  shape = model.layer(3).output_shape(shape);
  CHECK(shape == Shape{7, 32});  // lstm, last state only
  shape = model.layer(5).output_shape(shape);
  CHECK(shape == Shape{7, 23});
  CHECK(model.output_shape(7) == Shape{7, 23});
}

TEST_CASE("every architecture maps [B,4,1] to softmax rows") {
  Tensor x = random_input(5, 2);
  for (const std::string& name : model_names()) {
    CAPTURE(name);
    Model model(model_spec_by_name(name, 23, ArchParams{}), 3);
    Tensor probs = model.forward(x);
    REQUIRE(probs.shape() == Shape{5, 23});
    for (std::size_t b = 0; b < 5; ++b) {
      double sum = 0.0;
      for (std::size_t c = 0; c < 23; ++c) {
        CHECK(probs.at(b, c) >= 0.0f);
        sum += probs.at(b, c);
      }
      CHECK(sum == doctest::Approx(1.0).epsilon(1e-5));
    }
  }
}

TEST_CASE("unknown model names fail with the valid choices") {
  try {
    model_spec_by_name("transformer", 23, ArchParams{});
    FAIL("expected ArgumentError");
  } catch (const ArgumentError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("transformer") != std::string::npos);
    CHECK(msg.find("cnn-lstm") != std::string::npos);
  }
}

TEST_CASE("model construction rejects malformed specs") {
  ModelSpec no_head = cnn_lstm_spec(3, ArchParams{});
  no_head.layers.pop_back();
  CHECK_THROWS_AS(Model(no_head, 1), ArgumentError);

  ModelSpec relu_head = cnn_lstm_spec(3, ArchParams{});
  relu_head.layers.back().activation = "relu";
  CHECK_THROWS_AS(Model(relu_head, 1), ArgumentError);

  ModelSpec wrong_units = cnn_lstm_spec(3, ArchParams{});
  wrong_units.layers.back().units = 7;
  CHECK_THROWS_AS(Model(wrong_units, 1), ArgumentError);

  ModelSpec dense_on_seq = cnn_lstm_spec(3, ArchParams{});
  dense_on_seq.layers.erase(dense_on_seq.layers.begin() + 3);  // drop the last-state lstm
  CHECK_THROWS_AS(Model(dense_on_seq, 1), DimensionError);

  ModelSpec unknown_kind = cnn_lstm_spec(3, ArchParams{});
  unknown_kind.layers[0].kind = "attention";
  CHECK_THROWS_AS(Model(unknown_kind, 1), ArgumentError);
}

TEST_CASE("initialization is deterministic in the seed") {
  Model a(cnn_lstm_spec(23, ArchParams{}), 7);
  Model b(cnn_lstm_spec(23, ArchParams{}), 7);
  Model c(cnn_lstm_spec(23, ArchParams{}), 8);
  auto pa = a.params();
  auto pb = b.params();
  auto pc = c.params();
  bool same = true, different = false;
  for (std::size_t i = 0; i < pa.size(); ++i) {
    for (std::size_t j = 0; j < pa[i]->value.size(); ++j) {
      same &= pa[i]->value.flat()[j] == pb[i]->value.flat()[j];
      different |= pa[i]->value.flat()[j] != pc[i]->value.flat()[j];
    }
  }
  CHECK(same);
  CHECK(different);
}

TEST_CASE("predict returns argmax labels with their probabilities") {
  Model model(cnn_lstm_spec(23, ArchParams{}), 4);
  Tensor x = random_input(6, 5);
  Prediction pred = predict(model, x);
  REQUIRE(pred.labels.size() == 6);
  REQUIRE(pred.confidence.size() == 6);
  for (std::size_t b = 0; b < 6; ++b) {
    const int k = pred.labels[b];
    for (std::size_t c = 0; c < 23; ++c) {
      CHECK(pred.probs.at(b, c) <= pred.probs.at(b, static_cast<std::size_t>(k)));
    }
    CHECK(pred.confidence[b] == pred.probs.at(b, static_cast<std::size_t>(k)));
  }
}

TEST_CASE("predict handles the empty batch and rejects bad shapes") {
  Model model(cnn_lstm_spec(23, ArchParams{}), 4);
  Prediction empty = predict(model, Tensor({0, 4, 1}));
  CHECK(empty.probs.shape() == Shape{0, 23});
  CHECK(empty.labels.empty());
  CHECK_THROWS_AS(predict(model, Tensor({3, 4})), DimensionError);
  CHECK_THROWS_AS(predict(model, Tensor({3, 5, 1})), DimensionError);
}

TEST_CASE("checkpoints survive a save/load round trip bit for bit") {
  TempDir tmp;
  const fs::path file = tmp.path / "model.ckpt";
  Checkpoint ckpt = sample_checkpoint(11);
  save_checkpoint(ckpt, file);
  Checkpoint back = load_checkpoint(file);

  CHECK(back.version == kCheckpointVersion);
  CHECK(back.spec.name == "cnn-lstm");
  CHECK(back.spec.class_count == 3);
  REQUIRE(back.spec.layers.size() == ckpt.spec.layers.size());
  CHECK(back.scaler.mean == ckpt.scaler.mean);
  CHECK(back.scaler.stdev == ckpt.scaler.stdev);
  REQUIRE(back.labels.size() == 3);
  CHECK(back.labels.name(0) == "vessel 1");
  CHECK(back.labels.index_of("vessel 3") == 2);

  REQUIRE(back.tensors.size() == ckpt.tensors.size());
  for (std::size_t i = 0; i < back.tensors.size(); ++i) {
    CHECK(back.tensors[i].first == ckpt.tensors[i].first);
    REQUIRE(back.tensors[i].second.shape() == ckpt.tensors[i].second.shape());
    for (std::size_t j = 0; j < back.tensors[i].second.size(); ++j) {
      CHECK(back.tensors[i].second.flat()[j] == ckpt.tensors[i].second.flat()[j]);
    }
  }
}

TEST_CASE("a restored model predicts identically to the original") {
  TempDir tmp;
  const fs::path file = tmp.path / "model.ckpt";
  ArchParams p;
  p.conv_filters = 4;
  p.conv_kernel = 5;
  p.conv_stride = 3;
  p.lstm_hidden = 4;
  Model model(cnn_lstm_spec(3, p), 12);
  ScalerParams scaler;
  scaler.mean = {0, 0, 0, 0};
  scaler.stdev = {1, 1, 1, 1};
  LabelMap labels = LabelMap::from_vessel_ids({"a", "b", "c"});
  save_checkpoint(make_checkpoint(model, scaler, labels), file);

  Model restored = restore_model(load_checkpoint(file));
  Tensor x = random_input(4, 13);
  Tensor want = model.forward(x);
  Tensor got = restored.forward(x);
  REQUIRE(got.shape() == want.shape());
  for (std::size_t i = 0; i < got.size(); ++i) {
    CHECK(got.flat()[i] == want.flat()[i]);  // bitwise, not approximate
  }
}

TEST_CASE("saving twice produces byte-identical files") {
  TempDir tmp;
  Checkpoint ckpt = sample_checkpoint(14);
  save_checkpoint(ckpt, tmp.path / "a.ckpt");
  save_checkpoint(ckpt, tmp.path / "b.ckpt");
  CHECK(slurp(tmp.path / "a.ckpt") == slurp(tmp.path / "b.ckpt"));
}

TEST_CASE("checkpoint corruption is reported by kind") {
  TempDir tmp;
  const fs::path good = tmp.path / "good.ckpt";
  save_checkpoint(sample_checkpoint(15), good);
  const std::string bytes = slurp(good);
  REQUIRE(bytes.size() > 16);
  const fs::path bad = tmp.path / "bad.ckpt";

  auto kind_of = [&](const fs::path& p) {
    try {
      load_checkpoint(p);
      FAIL("expected CheckpointError");
    } catch (const CheckpointError& e) {
      return e.kind;
    }
    return CheckpointError::Kind::bad_magic;  // unreachable
  };

  SUBCASE("wrong magic") {
    std::string mutated = bytes;
    mutated[0] = 'X';
    spit(bad, mutated);
    CHECK(kind_of(bad) == CheckpointError::Kind::bad_magic);
  }
  SUBCASE("newer format version") {
    std::string mutated = bytes;
    mutated[7] = '2';  // SEATRK02
    spit(bad, mutated);
    CHECK(kind_of(bad) == CheckpointError::Kind::version_mismatch);
  }
  SUBCASE("last byte missing") {
    spit(bad, bytes.substr(0, bytes.size() - 1));
    CHECK(kind_of(bad) == CheckpointError::Kind::truncated);
  }
  SUBCASE("cut inside the manifest") {
    spit(bad, bytes.substr(0, 20));
    CHECK(kind_of(bad) == CheckpointError::Kind::truncated);
  }
  SUBCASE("trailing garbage") {
    spit(bad, bytes + "extra");
    CHECK(kind_of(bad) == CheckpointError::Kind::truncated);
  }
  SUBCASE("manifest is not json") {
    std::string mutated = bytes;
    mutated[12] = '!';  // first manifest byte
    spit(bad, mutated);
    CHECK(kind_of(bad) == CheckpointError::Kind::bad_manifest);
  }
  SUBCASE("missing file") {
    CHECK_THROWS_AS(load_checkpoint(tmp.path / "nope.ckpt"), IoError);
  }
}

TEST_CASE("weights that no longer fit the spec are a shape mismatch") {
  TempDir tmp;
  const fs::path file = tmp.path / "drift.ckpt";
  Checkpoint ckpt = sample_checkpoint(16);
  ckpt.spec.layers[0].filters = 8;  // spec says 8 filters, tensors carry 4
  save_checkpoint(ckpt, file);
  try {
    restore_model(load_checkpoint(file));
    FAIL("expected CheckpointError");
  } catch (const CheckpointError& e) {
    CHECK(e.kind == CheckpointError::Kind::shape_mismatch);
  }
}

TEST_CASE("restored scaler and labels drive end-to-end scoring") {
  TempDir tmp;
  const fs::path file = tmp.path / "score.ckpt";
  save_checkpoint(sample_checkpoint(17), file);
  Checkpoint ckpt = load_checkpoint(file);
  Model model = restore_model(ckpt);

  Tensor raw({1, 4});
  raw.at(0, 0) = 37.2f;
  raw.at(0, 1) = 23.1f;
  raw.at(0, 2) = 60.0f;
  raw.at(0, 3) = 200.0f;
  Tensor scaled = apply_scaler(ckpt.scaler, raw);
  Prediction pred = predict(model, to_model_input(scaled));
  REQUIRE(pred.labels.size() == 1);
  const std::string vessel = ckpt.labels.name(static_cast<std::size_t>(pred.labels[0]));
  CHECK(vessel.rfind("vessel ", 0) == 0);
}
