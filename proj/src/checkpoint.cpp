//
// solvflow - Copyright 2026 The solvflow authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "solvflow/checkpoint.h"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

namespace solvflow {
namespace {

static_assert(std::endian::native == std::endian::little,
              "checkpoint I/O assumes a little-endian host");

constexpr char kMagic[4] = { 'S', 'V', 'C', 'K' };

template <class I>
void put(std::string &out, I value) {
  char buf[sizeof(I)];
  std::memcpy(buf, &value, sizeof(I));
  out.append(buf, sizeof(I));
}

template <class I>
I get(const std::string &in, std::size_t &pos) {
  if (pos + sizeof(I) > in.size()) {
    throw CheckpointError("truncated checkpoint");
  }
  I value;
  std::memcpy(&value, in.data() + pos, sizeof(I));
  pos += sizeof(I);
  return value;
}

const ad::ParameterStore<float> *store_of(const models::ModelBundle &b) {
  if (b.gnn) {
    return &b.gnn->parameters();
  }
  if (b.deep) {
    return &b.deep->parameters();
  }
  return nullptr;
}

ad::ParameterStore<float> *store_of(models::ModelBundle &b) {
  return const_cast<ad::ParameterStore<float> *>(
      store_of(static_cast<const models::ModelBundle &>(b)));
}

std::vector<double> to_vector(const Eigen::RowVectorXd &v) {
  return { v.data(), v.data() + v.size() };
}

}  // namespace

void save_checkpoint(const models::ModelBundle &bundle, int input_width,
                     const nlohmann::json &metadata,
                     const std::filesystem::path &path) {
  nlohmann::json header;
  header["kind"] = models::to_string(bundle.kind);
  header["seed"] = bundle.seed;
  header["settings"] = bundle.settings.to_json();
  header["config_digest"] = bundle.config_digest();
  header["input_width"] = input_width;
  header["metadata"] = metadata;
  header["scaler"] = { { "mean", to_vector(bundle.scaler.mean()) },
                       { "scale", to_vector(bundle.scaler.scale()) } };
  header["gbdt"] = bundle.gbdt ? bundle.gbdt->to_json() : nlohmann::json();

  std::string data;
  nlohmann::json params = nlohmann::json::array();
  if (const auto *store = store_of(bundle)) {
    for (const auto *p: store->all()) {
      const auto &v = p->tensor.value();
      params.push_back({ { "name", p->name },
                         { "rows", v.rows() },
                         { "cols", v.cols() },
                         { "dtype", "float32" },
                         { "offset", data.size() } });
      data.append(reinterpret_cast<const char *>(v.data()),
                  sizeof(float) * static_cast<std::size_t>(v.size()));
    }
  }
  header["parameters"] = std::move(params);

  const std::string text = header.dump();
  std::string out(kMagic, sizeof kMagic);
  put<std::uint32_t>(out, kCheckpointVersion);
  put<std::uint64_t>(out, text.size());
  out += text;
  out += data;

  std::ofstream file(path, std::ios::binary | std::ios::trunc);
  if (!file) {
    throw CheckpointError("cannot write " + path.string());
  }
  file.write(out.data(), static_cast<std::streamsize>(out.size()));
  if (!file) {
    throw CheckpointError("failed writing " + path.string());
  }
}

LoadedCheckpoint load_checkpoint(const std::filesystem::path &path,
                                 const std::optional<std::string> &expected_digest) {
  std::ifstream file(path, std::ios::binary);
  if (!file) {
    throw CheckpointError("cannot read " + path.string());
  }
  const std::string in((std::istreambuf_iterator<char>(file)),
                       std::istreambuf_iterator<char>());
  if (in.size() < 4 || std::memcmp(in.data(), kMagic, 4) != 0) {
    throw CheckpointError(path.string() + " is not a solvflow checkpoint");
  }
  std::size_t pos = 4;
  const auto version = get<std::uint32_t>(in, pos);
  if (version != kCheckpointVersion) {
    throw CheckpointError("unsupported checkpoint version " + std::to_string(version));
  }
  const auto length = get<std::uint64_t>(in, pos);
  if (pos + length > in.size()) {
    throw CheckpointError("truncated checkpoint header");
  }
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(in.substr(pos, length));
  } catch (const nlohmann::json::exception &e) {
    throw CheckpointError(std::string("bad checkpoint header: ") + e.what());
  }
  const std::size_t data_start = pos + length;

  LoadedCheckpoint out;
  try {
    const auto kind = models::model_kind_from_string(header.at("kind").get<std::string>());
    const auto settings = models::ModelSettings::from_json(header.at("settings"));
    const std::string digest = header.at("config_digest").get<std::string>();
    if (models::config_digest(settings, kind) != digest) {
      throw CheckpointError("checkpoint config digest does not match its settings");
    }
    if (expected_digest && *expected_digest != digest) {
      throw ConfigMismatch("checkpoint config digest " + digest + " differs from "
                           + *expected_digest);
    }
    out.input_width = header.at("input_width").get<int>();
    out.metadata = header.value("metadata", nlohmann::json::object());
    out.bundle = models::make_bundle(kind, settings,
                                     header.at("seed").get<std::uint64_t>(),
                                     out.input_width);
    const auto &scaler = header.at("scaler");
    const auto mean = scaler.at("mean").get<std::vector<double>>();
    const auto scale = scaler.at("scale").get<std::vector<double>>();
    out.bundle.scaler = descriptors::ColumnScaler::from_values(
        Eigen::Map<const Eigen::RowVectorXd>(mean.data(), mean.size()),
        Eigen::Map<const Eigen::RowVectorXd>(scale.data(), scale.size()));
    if (!header.at("gbdt").is_null()) {
      out.bundle.gbdt = models::GbdtModel::from_json(header.at("gbdt"));
    }

    auto *store = store_of(out.bundle);
    const auto &params = header.at("parameters");
    const std::size_t expected = store ? store->size() : 0;
    if (params.size() != expected) {
      throw CheckpointError("checkpoint holds " + std::to_string(params.size())
                            + " arrays, model expects " + std::to_string(expected));
    }
    for (const auto &entry: params) {
      const std::string name = entry.at("name").get<std::string>();
      auto *p = store->find(name);
      if (p == nullptr) {
        throw CheckpointError("unexpected array '" + name + "'");
      }
      auto &v = p->tensor.mutable_value();
      if (entry.at("rows").get<Eigen::Index>() != v.rows()
          || entry.at("cols").get<Eigen::Index>() != v.cols()
          || entry.at("dtype").get<std::string>() != "float32") {
        throw CheckpointError("array '" + name + "' has the wrong shape or dtype");
      }
      const std::size_t offset = data_start + entry.at("offset").get<std::size_t>();
      const std::size_t bytes = sizeof(float) * static_cast<std::size_t>(v.size());
      if (offset + bytes > in.size()) {
        throw CheckpointError("array '" + name + "' runs past the end of the file");
      }
      std::memcpy(v.data(), in.data() + offset, bytes);
    }
  } catch (const nlohmann::json::exception &e) {
    throw CheckpointError(std::string("bad checkpoint header: ") + e.what());
  }
  return out;
}

}  // namespace solvflow
