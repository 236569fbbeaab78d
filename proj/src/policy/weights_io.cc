#include "mergebench/policy/weights_io.h"

#include <bit>
#include <cstring>

#include "mergebench/core/errors.h"
#include "mergebench/core/io.h"

namespace mergebench {

namespace {

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xffu));
}

void put_f32(std::string& out, double v) { put_u32(out, std::bit_cast<std::uint32_t>(static_cast<float>(v))); }

class Reader {
 public:
  explicit Reader(const std::string& b) : b_(b) {}

  std::uint32_t u32(const char* what) {
    if (pos_ + 4 > b_.size()) throw ParseError(std::string("weights file truncated reading ") + what);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(static_cast<unsigned char>(b_[pos_ + i])) << (8 * i);
    pos_ += 4;
    return v;
  }

  float f32(const char* what) { return std::bit_cast<float>(u32(what)); }

  std::string bytes(std::size_t n, const char* what) {
    if (pos_ + n > b_.size()) throw ParseError(std::string("weights file truncated reading ") + what);
    std::string s = b_.substr(pos_, n);
    pos_ += n;
    return s;
  }

  bool done() const { return pos_ == b_.size(); }

 private:
  const std::string& b_;
  std::size_t pos_ = 0;
};

void check_channels(const std::vector<std::string>& names) {
  const auto& expected = channel_names();
  bool ok = names.size() == expected.size();
  for (std::size_t i = 0; ok && i < names.size(); ++i) ok = names[i] == expected[i];
  if (!ok) throw ParseError("weights file channel layout does not match this build");
}

ModelConfig config_from(std::uint32_t d, std::uint32_t self_layers, std::uint32_t cross_layers, std::uint32_t heads) {
  ModelConfig cfg{static_cast<int>(d), static_cast<int>(self_layers), static_cast<int>(cross_layers),
                  static_cast<int>(heads)};
  try {
    validate(cfg);
  } catch (const ValidationError& e) {
    throw ParseError(std::string("weights file header: ") + e.what());
  }
  return cfg;
}

}  // namespace

std::string weights_to_bytes(const ModelWeights& w) {
  validate(w);
  std::string out(kWeightsMagic, 4);
  put_u32(out, kWeightsVersion);
  put_u32(out, static_cast<std::uint32_t>(w.cfg.d_model));
  put_u32(out, static_cast<std::uint32_t>(w.cfg.self_layers));
  put_u32(out, static_cast<std::uint32_t>(w.cfg.cross_layers));
  put_u32(out, static_cast<std::uint32_t>(w.cfg.heads));
  put_u32(out, kHistoryFrames);
  put_u32(out, static_cast<std::uint32_t>(channel_names().size()));
  for (std::string_view name : channel_names()) {
    put_u32(out, static_cast<std::uint32_t>(name.size()));
    out.append(name);
  }
  std::uint32_t count = 0;
  for_each_tensor(w, [&](const std::string&, const Eigen::MatrixXd&) { ++count; });
  put_u32(out, count);
  for_each_tensor(w, [&](const std::string&, const Eigen::MatrixXd& m) {
    put_u32(out, static_cast<std::uint32_t>(m.rows()));
    put_u32(out, static_cast<std::uint32_t>(m.cols()));
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      for (Eigen::Index j = 0; j < m.cols(); ++j) put_f32(out, m(i, j));
    }
  });
  return out;
}

ModelWeights weights_from_bytes(const std::string& bytes) {
  Reader r(bytes);
  if (r.bytes(4, "magic") != std::string(kWeightsMagic, 4)) throw ParseError("not a weights file (bad magic)");
  const std::uint32_t version = r.u32("version");
  if (version != kWeightsVersion) throw ParseError("unsupported weights version " + std::to_string(version));
  const std::uint32_t d = r.u32("d_model");
  const std::uint32_t sl = r.u32("self_layers");
  const std::uint32_t cl = r.u32("cross_layers");
  const std::uint32_t heads = r.u32("heads");
  if (d > 4096 || sl > 64 || cl > 64) throw ParseError("weights file header out of range");
  const std::uint32_t frames = r.u32("history_frames");
  if (frames != kHistoryFrames) throw ParseError("weights file history length " + std::to_string(frames));
  const std::uint32_t n_channels = r.u32("channel count");
  if (n_channels > 256) throw ParseError("weights file channel count out of range");
  std::vector<std::string> names;
  for (std::uint32_t i = 0; i < n_channels; ++i) names.push_back(r.bytes(r.u32("channel name length"), "channel name"));
  check_channels(names);

  ModelWeights w = zero_weights(config_from(d, sl, cl, heads));
  std::uint32_t expected = 0;
  for_each_tensor(w, [&](const std::string&, const Eigen::MatrixXd&) { ++expected; });
  const std::uint32_t count = r.u32("tensor count");
  if (count != expected) {
    throw ShapeError("weights file has " + std::to_string(count) + " tensors, expected " + std::to_string(expected));
  }
  for_each_tensor(w, [&](const std::string& name, Eigen::MatrixXd& m) {
    const std::uint32_t rows = r.u32("tensor rows");
    const std::uint32_t cols = r.u32("tensor cols");
    if (rows != m.rows() || cols != m.cols()) {
      throw ShapeError(name + ": expected " + std::to_string(m.rows()) + "x" + std::to_string(m.cols()) + ", got " +
                       std::to_string(rows) + "x" + std::to_string(cols));
    }
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      for (Eigen::Index j = 0; j < m.cols(); ++j) m(i, j) = r.f32("tensor data");
    }
  });
  if (!r.done()) throw ParseError("trailing bytes after weights");
  validate(w);
  return w;
}

nlohmann::ordered_json weights_to_json(const ModelWeights& w) {
  validate(w);
  nlohmann::ordered_json j;
  j["format"] = "B4MW";
  j["version"] = kWeightsVersion;
  j["d_model"] = w.cfg.d_model;
  j["self_layers"] = w.cfg.self_layers;
  j["cross_layers"] = w.cfg.cross_layers;
  j["heads"] = w.cfg.heads;
  j["history_frames"] = kHistoryFrames;
  j["channels"] = nlohmann::ordered_json::array();
  for (std::string_view name : channel_names()) j["channels"].push_back(std::string(name));
  j["tensors"] = nlohmann::ordered_json::array();
  for_each_tensor(w, [&](const std::string& name, const Eigen::MatrixXd& m) {
    nlohmann::ordered_json t;
    t["name"] = name;
    t["rows"] = m.rows();
    t["cols"] = m.cols();
    std::vector<float> data;
    data.reserve(m.size());
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      for (Eigen::Index k = 0; k < m.cols(); ++k) data.push_back(static_cast<float>(m(i, k)));
    }
    t["data"] = data;
    j["tensors"].push_back(std::move(t));
  });
  return j;
}

ModelWeights weights_from_json(const nlohmann::ordered_json& j) {
  try {
    if (j.at("format") != "B4MW") throw ParseError("not a weights document");
    if (j.at("version").get<std::uint32_t>() != kWeightsVersion) throw ParseError("unsupported weights version");
    if (j.at("history_frames").get<int>() != kHistoryFrames) throw ParseError("history length mismatch");
    check_channels(j.at("channels").get<std::vector<std::string>>());
    ModelWeights w = zero_weights(config_from(j.at("d_model").get<std::uint32_t>(), j.at("self_layers").get<std::uint32_t>(),
                                              j.at("cross_layers").get<std::uint32_t>(), j.at("heads").get<std::uint32_t>()));
    const auto& tensors = j.at("tensors");
    std::size_t idx = 0;
    for_each_tensor(w, [&](const std::string& name, Eigen::MatrixXd& m) {
      if (idx >= tensors.size()) throw ShapeError("missing tensor " + name);
      const auto& t = tensors[idx++];
      if (t.at("name") != name) throw ShapeError("expected tensor " + name + ", got " + t.at("name").get<std::string>());
      const auto data = t.at("data").get<std::vector<float>>();
      if (t.at("rows").get<Eigen::Index>() != m.rows() || t.at("cols").get<Eigen::Index>() != m.cols() ||
          static_cast<Eigen::Index>(data.size()) != m.size()) {
        throw ShapeError(name + ": expected " + std::to_string(m.rows()) + "x" + std::to_string(m.cols()));
      }
      for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index k = 0; k < m.cols(); ++k) m(i, k) = data[i * m.cols() + k];
      }
    });
    if (idx != tensors.size()) throw ShapeError("unexpected extra tensors");
    validate(w);
    return w;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("weights json: ") + e.what());
  }
}

void save_weights(const std::filesystem::path& path, const ModelWeights& w) {
  if (path.extension() == ".json") {
    write_file_atomic(path, weights_to_json(w).dump(1) + "\n");
  } else {
    write_file_atomic(path, weights_to_bytes(w));
  }
}

ModelWeights load_weights(const std::filesystem::path& path) {
  const std::string bytes = read_file(path);
  if (bytes.size() >= 4 && std::memcmp(bytes.data(), kWeightsMagic, 4) == 0) return weights_from_bytes(bytes);
  nlohmann::ordered_json j;
  try {
    j = nlohmann::ordered_json::parse(bytes);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(path.string() + ": neither a binary nor a JSON weights file");
  }
  return weights_from_json(j);
}

}  // namespace mergebench
