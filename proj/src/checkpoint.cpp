// SPDX-License-Identifier: Apache-2.0
#include "lat/checkpoint.hpp"

#include <cstdint>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace lat {

namespace {

constexpr char kMagic[8] = {'L', 'A', 'T', 'C', 'K', 'P', 'T', '1'};
constexpr std::uint32_t kVersion = 1;

std::uint64_t fnv1a(const unsigned char* data, std::size_t n) {
  std::uint64_t h = 1469598103934665603ull;
  for (std::size_t i = 0; i < n; ++i) {
    h ^= data[i];
    h *= 1099511628211ull;
  }
  return h;
}

template <class T>
void put(std::string& out, T v) {
  char buf[sizeof(T)];
  std::memcpy(buf, &v, sizeof(T));
  out.append(buf, sizeof(T));
}

template <class T>
T take(const std::string& in, std::size_t& off, const char* what) {
  if (off + sizeof(T) > in.size()) throw std::runtime_error(std::string("checksum mismatch: truncated ") + what);
  T v;
  std::memcpy(&v, in.data() + off, sizeof(T));
  off += sizeof(T);
  return v;
}

std::string config_block(const ModelConfig& c) {
  std::ostringstream os;
  os << "d_model=" << c.d_model << '\n'
     << "heads=" << c.heads << '\n'
     << "ffn_dim=" << c.ffn_dim << '\n'
     << "enc_layers=" << c.enc_layers << '\n'
     << "dec_layers=" << c.dec_layers << '\n'
     << "k_steps=" << c.k_steps << '\n'
     << "max_len=" << c.max_len << '\n'
     << "vocab_size=" << c.vocab_size << '\n'
     << "seed=" << c.seed << '\n';
  return os.str();
}

ModelConfig parse_config(const std::string& block) {
  std::map<std::string, std::string> kv;
  std::istringstream is(block);
  std::string line;
  while (std::getline(is, line)) {
    const auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    kv[line.substr(0, eq)] = line.substr(eq + 1);
  }
  auto get = [&](const char* key) -> long long {
    auto it = kv.find(key);
    if (it == kv.end()) throw std::runtime_error("malformed checkpoint: missing " + std::string(key));
    return std::stoll(it->second);
  };
  ModelConfig c;
  c.d_model = static_cast<int>(get("d_model"));
  c.heads = static_cast<int>(get("heads"));
  c.ffn_dim = static_cast<int>(get("ffn_dim"));
  c.enc_layers = static_cast<int>(get("enc_layers"));
  c.dec_layers = static_cast<int>(get("dec_layers"));
  c.k_steps = static_cast<int>(get("k_steps"));
  c.max_len = static_cast<int>(get("max_len"));
  c.vocab_size = static_cast<int>(get("vocab_size"));
  c.seed = static_cast<std::uint64_t>(get("seed"));
  return c;
}

std::string array_region(const ModelParams& params) {
  std::string out;
  for (const ArrayRef& a : array_refs(params)) {
    const std::uint16_t name_len = static_cast<std::uint16_t>(std::strlen(a.name));
    put(out, name_len);
    out.append(a.name, name_len);
    put(out, static_cast<std::uint64_t>(a.rows));
    put(out, static_cast<std::uint64_t>(a.cols));
    // explicit row-major order, independent of Eigen's storage layout
    for (Eigen::Index r = 0; r < a.rows; ++r) {
      for (Eigen::Index col = 0; col < a.cols; ++col) {
        put(out, a.data[col * a.rows + r]);
      }
    }
  }
  return out;
}

}  // namespace

void save_checkpoint(const ModelParams& params, const std::string& path) {
  const std::string cfg = config_block(params.config);
  const std::string arrays = array_region(params);
  const std::uint64_t checksum =
      fnv1a(reinterpret_cast<const unsigned char*>(arrays.data()), arrays.size());

  std::string out;
  out.append(kMagic, sizeof(kMagic));
  put(out, kVersion);
  put(out, std::uint32_t{0});
  put(out, static_cast<std::uint64_t>(cfg.size()));
  out += cfg;
  put(out, checksum);
  put(out, static_cast<std::uint32_t>(array_refs(params).size()));
  out += arrays;

  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw std::runtime_error("cannot write checkpoint: " + path);
  f.write(out.data(), static_cast<std::streamsize>(out.size()));
  if (!f) throw std::runtime_error("cannot write checkpoint: " + path);
}

ModelParams load_checkpoint(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("file not found: " + path);
  std::string blob((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());

  std::size_t off = 0;
  if (blob.size() < sizeof(kMagic) || std::memcmp(blob.data(), kMagic, sizeof(kMagic)) != 0) {
    throw std::runtime_error("malformed checkpoint: bad magic");
  }
  off = sizeof(kMagic);
  const auto version = take<std::uint32_t>(blob, off, "header");
  if (version != kVersion) throw std::runtime_error("unsupported checkpoint version");
  take<std::uint32_t>(blob, off, "header");
  const auto cfg_size = take<std::uint64_t>(blob, off, "header");
  if (off + cfg_size > blob.size()) throw std::runtime_error("malformed checkpoint: bad config size");
  const ModelConfig config = parse_config(blob.substr(off, cfg_size));
  off += cfg_size;
  const auto checksum = take<std::uint64_t>(blob, off, "header");
  const auto array_count = take<std::uint32_t>(blob, off, "header");

  const std::string arrays = blob.substr(off);
  if (fnv1a(reinterpret_cast<const unsigned char*>(arrays.data()), arrays.size()) != checksum) {
    throw std::runtime_error("checksum mismatch");
  }

  ModelParams params = zeros_like(config);
  std::vector<ArrayRef> refs = array_refs(params);
  if (array_count != refs.size()) throw std::runtime_error("malformed checkpoint: array count");
  for (ArrayRef& a : refs) {
    const auto name_len = take<std::uint16_t>(blob, off, "array header");
    if (off + name_len > blob.size()) throw std::runtime_error("checksum mismatch: truncated name");
    const std::string name = blob.substr(off, name_len);
    off += name_len;
    if (name != a.name) throw std::runtime_error("malformed checkpoint: unexpected array " + name);
    const auto rows = take<std::uint64_t>(blob, off, "array header");
    const auto cols = take<std::uint64_t>(blob, off, "array header");
    if (rows != static_cast<std::uint64_t>(a.rows) ||
        cols != static_cast<std::uint64_t>(a.cols)) {
      throw std::runtime_error("malformed checkpoint: array shape disagrees with config");
    }
    for (Eigen::Index r = 0; r < a.rows; ++r) {
      for (Eigen::Index col = 0; col < a.cols; ++col) {
        a.data[col * a.rows + r] = take<double>(blob, off, "array data");
      }
    }
  }
  return params;
}

}  // namespace lat
