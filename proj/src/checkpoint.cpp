#include "seatrack/checkpoint.hpp"

#include <cstring>
#include <fstream>

#include <json.hpp>

#include "seatrack/error.hpp"

namespace seatrack {

namespace {

using nlohmann::json;

json layer_to_json(const LayerDesc& d) {
  json j;
  j["kind"] = d.kind;
  if (d.kind == "conv1d") {
    j["filters"] = d.filters;
    j["kernel"] = d.kernel;
    j["stride"] = d.stride;
    j["activation"] = d.activation;
  } else if (d.kind == "lstm") {
    j["hidden"] = d.hidden;
    j["return_sequences"] = d.return_sequences;
    j["peephole"] = d.peephole;
  } else if (d.kind == "dropout") {
    j["rate"] = d.rate;
  } else if (d.kind == "dense") {
    j["units"] = d.units;
    j["activation"] = d.activation;
  }
  return j;
}

LayerDesc layer_from_json(const json& j) {
  LayerDesc d;
  d.kind = j.at("kind").get<std::string>();
  if (d.kind == "conv1d") {
    d.filters = j.at("filters").get<std::size_t>();
    d.kernel = j.at("kernel").get<std::size_t>();
    d.stride = j.at("stride").get<std::size_t>();
    d.activation = j.at("activation").get<std::string>();
  } else if (d.kind == "lstm") {
    d.hidden = j.at("hidden").get<std::size_t>();
    d.return_sequences = j.at("return_sequences").get<bool>();
    d.peephole = j.at("peephole").get<bool>();
  } else if (d.kind == "dropout") {
    d.rate = j.at("rate").get<double>();
  } else if (d.kind == "dense") {
    d.units = j.at("units").get<std::size_t>();
    d.activation = j.at("activation").get<std::string>();
  }
  return d;
}

json spec_to_json(const ModelSpec& s) {
  json j;
  j["name"] = s.name;
  j["input_shape"] = s.input_shape;
  j["class_count"] = s.class_count;
  json layers = json::array();
  for (const LayerDesc& d : s.layers) layers.push_back(layer_to_json(d));
  j["layers"] = layers;
  return j;
}

ModelSpec spec_from_json(const json& j) {
  ModelSpec s;
  s.name = j.at("name").get<std::string>();
  s.input_shape = j.at("input_shape").get<Shape>();
  s.class_count = j.at("class_count").get<std::size_t>();
  for (const json& lj : j.at("layers")) s.layers.push_back(layer_from_json(lj));
  return s;
}

void write_u32_le(std::ostream& out, std::uint32_t v) {
  unsigned char b[4] = {static_cast<unsigned char>(v & 0xff),
                        static_cast<unsigned char>((v >> 8) & 0xff),
                        static_cast<unsigned char>((v >> 16) & 0xff),
                        static_cast<unsigned char>((v >> 24) & 0xff)};
  out.write(reinterpret_cast<const char*>(b), 4);
}

std::uint32_t read_u32_le(const unsigned char* b) {
  return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
         (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

}  // namespace

Checkpoint make_checkpoint(Model& model, const ScalerParams& scaler, const LabelMap& labels) {
  if (labels.size() != model.spec().class_count) {
    throw ArgumentError("checkpoint: label map has " + std::to_string(labels.size()) +
                        " vessels but the model emits " +
                        std::to_string(model.spec().class_count) + " classes");
  }
  Checkpoint c;
  c.spec = model.spec();
  c.scaler = scaler;
  c.labels = labels;
  for (ParamT<float>* p : model.params()) c.tensors.emplace_back(p->name, p->value);
  return c;
}

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path) {
  json manifest;
  manifest["version"] = ckpt.version;
  manifest["model"] = spec_to_json(ckpt.spec);
  manifest["scaler"]["mean"] = ckpt.scaler.mean;
  manifest["scaler"]["std"] = ckpt.scaler.stdev;
  manifest["labels"] = ckpt.labels.names();
  json tensors = json::array();
  std::size_t offset = 0;
  for (const auto& [name, t] : ckpt.tensors) {
    json tj;
    tj["name"] = name;
    tj["shape"] = t.shape();
    tj["offset"] = offset;  // bytes into the data region
    tensors.push_back(tj);
    offset += t.size() * sizeof(float);
  }
  manifest["tensors"] = tensors;
  const std::string text = manifest.dump();  // nlohmann sorts keys: stable bytes

  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out.write(kCheckpointMagic, sizeof(kCheckpointMagic));
  write_u32_le(out, static_cast<std::uint32_t>(text.size()));
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  for (const auto& [name, t] : ckpt.tensors) {
    // Raw little-endian float32; every supported target is little-endian.
    out.write(reinterpret_cast<const char*>(t.data()),
              static_cast<std::streamsize>(t.size() * sizeof(float)));
  }
  if (!out.good()) throw IoError("failed while writing '" + path.string() + "'");
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                   std::istreambuf_iterator<char>());
  if (bytes.size() < sizeof(kCheckpointMagic) + 4) {
    throw CheckpointError(CheckpointError::Kind::truncated,
                          "checkpoint: file is too small to hold a header");
  }
  if (std::memcmp(bytes.data(), "SEATRK", 6) != 0) {
    throw CheckpointError(CheckpointError::Kind::bad_magic,
                          "checkpoint: magic bytes missing; not a checkpoint file");
  }
  if (std::memcmp(bytes.data(), kCheckpointMagic, 8) != 0) {
    throw CheckpointError(
        CheckpointError::Kind::version_mismatch,
        "checkpoint: format version '" + std::string(bytes.begin() + 6, bytes.begin() + 8) +
            "' is not the supported '01'");
  }
  const std::uint32_t manifest_len = read_u32_le(bytes.data() + 8);
  const std::size_t data_start = 12 + static_cast<std::size_t>(manifest_len);
  if (bytes.size() < data_start) {
    throw CheckpointError(CheckpointError::Kind::truncated,
                          "checkpoint: manifest is cut short");
  }
  json manifest;
  try {
    manifest = json::parse(bytes.begin() + 12, bytes.begin() + static_cast<long>(data_start));
  } catch (const json::exception& e) {
    throw CheckpointError(CheckpointError::Kind::bad_manifest,
                          std::string("checkpoint: manifest is not valid JSON: ") + e.what());
  }
  Checkpoint c;
  try {
    c.version = manifest.at("version").get<int>();
    if (c.version != kCheckpointVersion) {
      throw CheckpointError(CheckpointError::Kind::version_mismatch,
                            "checkpoint: manifest version " + std::to_string(c.version) +
                                " is not supported");
    }
    c.spec = spec_from_json(manifest.at("model"));
    c.scaler.mean = manifest.at("scaler").at("mean").get<std::vector<double>>();
    c.scaler.stdev = manifest.at("scaler").at("std").get<std::vector<double>>();
    c.labels = LabelMap::from_vessel_ids(
        manifest.at("labels").get<std::vector<std::string>>());
    std::size_t expect_offset = 0;
    for (const json& tj : manifest.at("tensors")) {
      const std::string name = tj.at("name").get<std::string>();
      const Shape shape = tj.at("shape").get<Shape>();
      const std::size_t offset = tj.at("offset").get<std::size_t>();
      if (offset != expect_offset) {
        throw CheckpointError(CheckpointError::Kind::bad_manifest,
                              "checkpoint: tensor '" + name + "' offset is inconsistent");
      }
      std::size_t count = shape.empty() ? 0 : 1;
      for (std::size_t d : shape) count *= d;
      const std::size_t lo = data_start + offset;
      const std::size_t bytes_needed = count * sizeof(float);
      if (lo + bytes_needed > bytes.size()) {
        throw CheckpointError(CheckpointError::Kind::truncated,
                              "checkpoint: tensor '" + name + "' data is cut short");
      }
      std::vector<float> values(count);
      std::memcpy(values.data(), bytes.data() + lo, bytes_needed);
      c.tensors.emplace_back(name, Tensor(shape, std::move(values)));
      expect_offset += bytes_needed;
    }
    if (data_start + expect_offset != bytes.size()) {
      throw CheckpointError(CheckpointError::Kind::truncated,
                            "checkpoint: file size does not match the manifest (" +
                                std::to_string(bytes.size() - data_start) + " data bytes, " +
                                std::to_string(expect_offset) + " declared)");
    }
  } catch (const json::exception& e) {
    throw CheckpointError(CheckpointError::Kind::bad_manifest,
                          std::string("checkpoint: manifest is missing fields: ") + e.what());
  }
  return c;
}

Model restore_model(const Checkpoint& ckpt) {
  Model model(ckpt.spec, 0);
  std::vector<ParamT<float>*> params = model.params();
  if (params.size() != ckpt.tensors.size()) {
    throw CheckpointError(CheckpointError::Kind::shape_mismatch,
                          "checkpoint: " + std::to_string(ckpt.tensors.size()) +
                              " stored tensors for a model with " +
                              std::to_string(params.size()) + " parameters");
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    const auto& [name, t] = ckpt.tensors[i];
    if (params[i]->name != name || !params[i]->value.same_shape(t)) {
      throw CheckpointError(CheckpointError::Kind::shape_mismatch,
                            "checkpoint: tensor '" + name + "' " + shape_str(t.shape()) +
                                " does not match parameter '" + params[i]->name + "' " +
                                shape_str(params[i]->value.shape()));
    }
    params[i]->value = t;
  }
  return model;
}

}  // namespace seatrack
