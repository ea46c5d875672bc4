#pragma once

#include <bit>
#include <cstring>
#include <fstream>
#include <string>
#include <type_traits>

#include <json.hpp>

#include "ppgf/model.hpp"

namespace ppgf {

// Checkpoint layout (bit-exact):
//   magic bytes "PPGF1\n"
//   one UTF-8 line: JSON {format_version, config, params:[{name,shape,dtype,byte_offset}]}
//   raw little-endian parameter data in manifest order
inline constexpr char kCkptMagic[] = "PPGF1\n";
inline constexpr int kCkptVersion = 1;

nlohmann::json config_to_json(const PPGFConfig& cfg);
PPGFConfig config_from_json(const nlohmann::json& j);

template <typename T>
const char* dtype_tag() {
  if constexpr (std::is_same_v<T, float>) return "f32";
  else return "f64";
}

template <typename T>
void save_checkpoint(const PPGFModel<T>& model, const std::string& path) {
  nlohmann::json manifest = nlohmann::json::array();
  int64_t offset = 0;
  for (const auto& p : model.params) {
    manifest.push_back({{"name", p.name}, {"shape", p.value.shape}, {"dtype", dtype_tag<T>()}, {"byte_offset", offset}});
    offset += p.value.numel() * static_cast<int64_t>(sizeof(T));
  }
  nlohmann::json header = {{"format_version", kCkptVersion}, {"config", config_to_json(model.cfg)}, {"params", manifest}};
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(Errc::IoError, "cannot write " + path);
  out.write(kCkptMagic, 6);
  const std::string hs = header.dump();
  out.write(hs.data(), static_cast<std::streamsize>(hs.size()));
  out.put('\n');
  static_assert(std::endian::native == std::endian::little, "checkpoint writer assumes little-endian host");
  for (const auto& p : model.params)
    out.write(reinterpret_cast<const char*>(p.value.ptr()), p.value.numel() * static_cast<std::streamsize>(sizeof(T)));
  if (!out) fail(Errc::IoError, "short write to " + path);
}

template <typename T>
PPGFModel<T> load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(Errc::FileNotFound, path);
  char magic[6];
  if (!in.read(magic, 6) || std::memcmp(magic, kCkptMagic, 6) != 0)
    fail(Errc::BadMagic, path + " is not a checkpoint");
  std::string header_line;
  if (!std::getline(in, header_line)) fail(Errc::TruncatedCheckpoint, path + " missing header");
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(header_line);
  } catch (const nlohmann::json::exception& e) {
    fail(Errc::TruncatedCheckpoint, path + " header is not valid JSON: " + e.what());
  }
  if (!header.contains("format_version") || header["format_version"].get<int>() != kCkptVersion)
    fail(Errc::BadVersion, path + " has unsupported format version");

  PPGFConfig cfg = config_from_json(header["config"]);
  PPGFModel<T> model = PPGFModel<T>::build(cfg);

  const auto& manifest = header["params"];
  if (manifest.size() != model.params.size())
    fail(Errc::TruncatedCheckpoint, path + " manifest lists " + str(manifest.size()) + " params, model has " +
                                        str(model.params.size()));
  // validate total payload length before reading
  const std::streampos data_start = in.tellg();
  in.seekg(0, std::ios::end);
  const int64_t payload = static_cast<int64_t>(in.tellg() - data_start);
  int64_t expect = 0;
  for (const auto& e : manifest) expect += TensorT<T>::numel_of(e["shape"].get<std::vector<int>>()) * static_cast<int64_t>(sizeof(T));
  if (payload != expect)
    fail(Errc::TruncatedCheckpoint, path + " payload " + str(payload) + " bytes, expected " + str(expect));
  in.seekg(data_start);

  for (size_t i = 0; i < model.params.size(); ++i) {
    const auto& e = manifest[i];
    auto& p = model.params[i];
    if (e["name"].get<std::string>() != p.name)
      fail(Errc::TruncatedCheckpoint, path + " manifest order mismatch at '" + p.name + "'");
    if (e["dtype"].get<std::string>() != dtype_tag<T>())
      fail(Errc::BadDtype, path + " param '" + p.name + "' has dtype " + e["dtype"].get<std::string>());
    if (e["shape"].get<std::vector<int>>() != p.value.shape)
      fail(Errc::TruncatedCheckpoint, path + " shape mismatch on '" + p.name + "'");
    if (!in.read(reinterpret_cast<char*>(p.value.ptr()), p.value.numel() * static_cast<std::streamsize>(sizeof(T))))
      fail(Errc::TruncatedCheckpoint, path + " truncated while reading '" + p.name + "'");
  }
  return model;
}

}  // namespace ppgf
