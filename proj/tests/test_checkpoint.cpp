// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <sstream>

#include "lat/checkpoint.hpp"

using namespace lat;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  REQUIRE(f);
  std::ostringstream os;
  os << f.rdbuf();
  return os.str();
}

ModelConfig cfg() {
  ModelConfig c;
  c.d_model = 8;
  c.heads = 2;
  c.ffn_dim = 16;
  c.max_len = 16;
  c.vocab_size = kNumReserved + 4;
  c.seed = 77;
  return c;
}

}  // namespace

TEST_CASE("save -> load -> save reproduces identical bytes") {
  ModelParams p = init_params(cfg());
  save_checkpoint(p, "ckpt_a.bin");
  ModelParams q = load_checkpoint("ckpt_a.bin");
  save_checkpoint(q, "ckpt_b.bin");
  CHECK(slurp("ckpt_a.bin") == slurp("ckpt_b.bin"));
  CHECK(q.config.vocab_size == p.config.vocab_size);
  CHECK(q.tok_emb == p.tok_emb);
  CHECK(q.local.wh == p.local.wh);
  std::remove("ckpt_a.bin");
  std::remove("ckpt_b.bin");
}

TEST_CASE("truncation is a checksum mismatch") {
  ModelParams p = init_params(cfg());
  save_checkpoint(p, "ckpt_t.bin");
  std::string bytes = slurp("ckpt_t.bin");
  {
    std::ofstream f("ckpt_t.bin", std::ios::binary | std::ios::trunc);
    f.write(bytes.data(), static_cast<std::streamsize>(bytes.size() - 64));
  }
  CHECK_THROWS_WITH_AS(load_checkpoint("ckpt_t.bin"), "checksum mismatch", std::runtime_error);
  std::remove("ckpt_t.bin");
}

TEST_CASE("flipped payload byte is a checksum mismatch") {
  ModelParams p = init_params(cfg());
  save_checkpoint(p, "ckpt_f.bin");
  std::string bytes = slurp("ckpt_f.bin");
  bytes[bytes.size() - 5] ^= 0x20;
  {
    std::ofstream f("ckpt_f.bin", std::ios::binary | std::ios::trunc);
    f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  }
  CHECK_THROWS_WITH_AS(load_checkpoint("ckpt_f.bin"), "checksum mismatch", std::runtime_error);
  std::remove("ckpt_f.bin");
}

TEST_CASE("config that disagrees with arrays is malformed") {
  ModelParams p = init_params(cfg());
  save_checkpoint(p, "ckpt_m.bin");
  std::string bytes = slurp("ckpt_m.bin");
  // grow vocab_size in the embedded config text; array shapes then disagree
  const std::string needle = "vocab_size=10";
  const auto at = bytes.find(needle);
  REQUIRE(at != std::string::npos);
  bytes.replace(at, needle.size(), "vocab_size=11");
  {
    std::ofstream f("ckpt_m.bin", std::ios::binary | std::ios::trunc);
    f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  }
  try {
    load_checkpoint("ckpt_m.bin");
    FAIL("expected malformed checkpoint");
  } catch (const std::runtime_error& e) {
    CHECK(std::string(e.what()).find("malformed checkpoint") != std::string::npos);
  }
  std::remove("ckpt_m.bin");
}

TEST_CASE("bad magic and missing file") {
  {
    std::ofstream f("ckpt_x.bin", std::ios::binary);
    f << "NOTACKPTxxxxxxxxxxxxxxxxxxxxxxxx";
  }
  try {
    load_checkpoint("ckpt_x.bin");
    FAIL("expected malformed checkpoint");
  } catch (const std::runtime_error& e) {
    CHECK(std::string(e.what()).find("bad magic") != std::string::npos);
  }
  std::remove("ckpt_x.bin");
  CHECK_THROWS_AS(load_checkpoint("definitely_missing.bin"), std::runtime_error);
}
