// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "lat/model.hpp"

using namespace lat;

namespace {

ModelConfig tiny_config() {
  ModelConfig c;
  c.d_model = 8;
  c.heads = 2;
  c.ffn_dim = 16;
  c.max_len = 16;
  c.vocab_size = kNumReserved + 6;
  c.seed = 42;
  return c;
}

std::vector<TrainExample> tiny_batch(std::uint64_t seed = 3) {
  std::mt19937_64 rng(seed);
  std::vector<TrainExample> batch;
  batch.push_back(make_train_example(rng, {6, 7, 8}, {8, 7, 6}, 0.15));
  batch.push_back(make_train_example(rng, {9, 10}, {10, 9, 6, 7}, 0.15));
  return batch;
}

double numeric_grad(ModelParams& params, const std::vector<TrainExample>& batch, double alpha,
                    double* entry, double h = 1e-4) {
  const double orig = *entry;
  *entry = orig + h;
  const double fp = training_loss_value(params, batch, alpha);
  *entry = orig - h;
  const double fm = training_loss_value(params, batch, alpha);
  *entry = orig;
  return (fp - fm) / (2.0 * h);
}

}  // namespace

TEST_CASE("parameter count matches the closed form") {
  ModelConfig c = tiny_config();
  ModelParams p = init_params(c);
  long long total = 0;
  for (const ArrayRef& a : array_refs(p)) total += a.size();
  CHECK(total == parameter_count(c));

  ModelConfig big;
  big.vocab_size = 100;
  ModelParams q = init_params(big);
  total = 0;
  for (const ArrayRef& a : array_refs(q)) total += a.size();
  CHECK(total == parameter_count(big));
}

TEST_CASE("encode shapes and determinism") {
  ModelParams p = init_params(tiny_config());
  const std::vector<TokenId> src{6, 7, 8, 9, 10};
  EncodeResult a = encode(p, src);
  CHECK(a.states.rows() == 6);  // LENGTH + 5 tokens
  CHECK(a.states.cols() == 8);
  CHECK(a.length_logits.size() == 16);
  EncodeResult b = encode(p, src);
  CHECK(a.states == b.states);
  CHECK(a.length_logits == b.length_logits);

  std::vector<TokenId> too_long(16, 6);
  CHECK_THROWS_WITH(encode(p, too_long), "source too long");
}

TEST_CASE("zero params give flat length logits") {
  ModelParams p = zeros_like(tiny_config());
  EncodeResult r = encode(p, {6, 7});
  CHECK(r.length_logits.maxCoeff() == r.length_logits.minCoeff());
}

TEST_CASE("decode_positions: one vector per position, position-sensitive") {
  ModelParams p = init_params(tiny_config());
  EncodeResult enc = encode(p, {6, 7, 8});
  Matrix pos = decode_positions(p, {kMaskId, kMaskId, kMaskId, kMaskId}, enc.states);
  CHECK(pos.rows() == 4);
  CHECK(pos.cols() == 8);
  CHECK(pos.allFinite());
  // identical MASK inputs still separate through position embeddings
  CHECK((pos.row(0) - pos.row(1)).norm() > 0.0);

  CHECK(decode_positions(p, {}, enc.states).rows() == 0);
}

TEST_CASE("local_translate_greedy: bounded, scored, deterministic") {
  ModelParams p = init_params(tiny_config());
  EncodeResult enc = encode(p, {6, 7, 8});
  Matrix pos = decode_positions(p, {kMaskId, kMaskId, kMaskId}, enc.states);
  for (int i = 0; i < 3; ++i) {
    Piece piece = local_translate_greedy(p, pos.row(i).transpose(), i);
    CHECK(piece.tokens.size() <= 3);
    for (std::size_t j = 0; j < piece.tokens.size(); ++j) {
      CHECK(piece.tokens[j].score <= 0.0);
      CHECK(piece.tokens[j].token != kMaskId);
      CHECK(piece.tokens[j].token != kEosId);
      CHECK(piece.tokens[j].position.value() == doctest::Approx(double(i) + j));
    }
    Piece again = local_translate_greedy(p, pos.row(i).transpose(), i);
    REQUIRE(again.tokens.size() == piece.tokens.size());
    for (std::size_t j = 0; j < piece.tokens.size(); ++j) {
      CHECK(same_content(again.tokens[j], piece.tokens[j]));
    }
  }
}

TEST_CASE("teacher log-probs agree with greedy scores on the greedy path") {
  ModelParams p = init_params(tiny_config());
  EncodeResult enc = encode(p, {6, 7, 8, 9});
  Matrix pos = decode_positions(p, {kMaskId, kMaskId}, enc.states);
  Piece piece = local_translate_greedy(p, pos.row(0).transpose(), 0);
  std::vector<TokenId> gold = token_ids(piece.tokens);
  if (gold.size() < 3) gold.push_back(kEosId);
  while (gold.size() < 3) gold.push_back(kPadId);
  Vector teacher = local_translate_teacher(p, pos.row(0).transpose(), gold);
  for (std::size_t j = 0; j < piece.tokens.size(); ++j) {
    CHECK(teacher(static_cast<Eigen::Index>(j)) == doctest::Approx(piece.tokens[j].score));
  }
}

TEST_CASE("teacher step probabilities normalize over the support") {
  ModelParams p = init_params(tiny_config());
  EncodeResult enc = encode(p, {6});
  Matrix pos = decode_positions(p, {kMaskId}, enc.states);
  double sum = 0.0;
  for (TokenId t = 0; t < p.config.vocab_size; ++t) {
    Vector lp = local_translate_teacher(p, pos.row(0).transpose(), {t, 6, 6});
    sum += std::exp(lp(0));  // exp(-inf) = 0 covers the MASK slot
  }
  CHECK(sum == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("changing an early gold token changes later teacher log-probs") {
  ModelParams p = init_params(tiny_config());
  EncodeResult enc = encode(p, {6, 7});
  Matrix pos = decode_positions(p, {kMaskId, kMaskId}, enc.states);
  Vector a = local_translate_teacher(p, pos.row(0).transpose(), {6, 7, 8});
  Vector b = local_translate_teacher(p, pos.row(0).transpose(), {9, 7, 8});
  CHECK(a(1) != b(1));
  CHECK(a(2) != b(2));
}

TEST_CASE("mask_sample bounds and forced single-token mask") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    MaskSampleResult r = mask_sample(rng, {6});
    CHECK(r.input == std::vector<TokenId>{kMaskId});
    CHECK(r.is_masked == std::vector<char>{1});
  }
  for (int trial = 0; trial < 200; ++trial) {
    MaskSampleResult r = mask_sample(rng, {6, 7, 8, 9, 10});
    int masked = 0;
    for (char m : r.is_masked) masked += m;
    CHECK(masked >= 1);
    CHECK(masked <= 5);
    for (std::size_t i = 0; i < r.input.size(); ++i) {
      CHECK((r.input[i] == kMaskId) == static_cast<bool>(r.is_masked[i]));
    }
  }
}

TEST_CASE("mask_sample size is uniform on 1..N") {
  std::mt19937_64 rng(11);
  const std::vector<TokenId> target{6, 7, 8, 9};
  double total = 0.0;
  const int draws = 100000;
  for (int i = 0; i < draws; ++i) {
    MaskSampleResult r = mask_sample(rng, target);
    for (char m : r.is_masked) total += m;
  }
  // E[m] = 2.5, sd(mean) = sqrt(15/12)/sqrt(draws) -> 3 sigma ~ 0.011
  CHECK(total / draws == doctest::Approx(2.5).epsilon(0.011 / 2.5));
}

TEST_CASE("deletion_augment bounds and realignment") {
  std::mt19937_64 rng(13);
  // N=10 -> d is always 1 since floor(1.5) = 1
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<TokenId> input(10, 6);
    DeletionResult r = deletion_augment(rng, input, 0.15);
    CHECK(r.input.size() == 9);
    CHECK(r.orig_index.size() == 9);
    for (std::size_t i = 1; i < r.orig_index.size(); ++i) {
      CHECK(r.orig_index[i] > r.orig_index[i - 1]);
    }
  }
  // d never exceeds floor(0.15*N) (min 1)
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<TokenId> input(20, 6);
    DeletionResult r = deletion_augment(rng, input, 0.15);
    CHECK(input.size() - r.input.size() >= 1);
    CHECK(input.size() - r.input.size() <= 3);
  }
  CHECK_THROWS_AS(deletion_augment(rng, {6}, 0.15), std::invalid_argument);
}

TEST_CASE("gold sequences: deletion shifts neighbours' pieces") {
  // T = [a,b,c,d] with ids 6,7,8,9; labels are T with EOS appended
  const std::vector<TokenId> target_full{6, 7, 8, 9, kEosId};
  CHECK(gold_sequence(target_full, 1, 3) == std::vector<TokenId>{7, 8, 9});
  // surviving position with original index 3: [d, EOS, PAD]
  CHECK(gold_sequence(target_full, 3, 3) == std::vector<TokenId>{9, kEosId, kPadId});
  CHECK(gold_sequence(target_full, 4, 3) == std::vector<TokenId>{kEosId, kPadId, kPadId});
}

TEST_CASE("alpha=0 loss equals masked-only cross-entropy") {
  ModelParams p = init_params(tiny_config());
  std::vector<TrainExample> batch = tiny_batch();
  LossResult res = training_loss(p, batch, 0.0);

  double oracle = 0.0;
  for (const TrainExample& ex : batch) {
    EncodeResult enc = encode(p, ex.source);
    Matrix pos = decode_positions(p, ex.decoder_input, enc.states);
    for (std::size_t i = 0; i < ex.decoder_input.size(); ++i) {
      const int orig = ex.orig_index[i];
      std::vector<TokenId> gold = gold_sequence(ex.target_full, orig, 3);
      Vector lp = local_translate_teacher(p, pos.row(static_cast<Eigen::Index>(i)).transpose(),
                                          gold);
      for (int j = 0; j < 3; ++j) {
        const int idx = orig + j;
        if (gold[static_cast<std::size_t>(j)] == kPadId) break;
        if (ex.is_masked[static_cast<std::size_t>(idx)]) oracle -= lp(j);
      }
    }
  }
  oracle /= static_cast<double>(batch.size());
  CHECK(res.token_loss == doctest::Approx(oracle).epsilon(1e-10));
}

TEST_CASE("alpha=1 makes the token loss independent of the mask set") {
  ModelParams p = init_params(tiny_config());
  std::vector<TrainExample> batch = tiny_batch();
  std::vector<TrainExample> all_masked = batch, none_masked = batch;
  for (auto& ex : all_masked) std::fill(ex.is_masked.begin(), ex.is_masked.end(), 1);
  for (auto& ex : none_masked) std::fill(ex.is_masked.begin(), ex.is_masked.end(), 0);
  const double a = training_loss(p, all_masked, 1.0).token_loss;
  const double b = training_loss(p, none_masked, 1.0).token_loss;
  CHECK(a == doctest::Approx(b).epsilon(1e-12));
}

TEST_CASE("loss is permutation-invariant over batch order") {
  ModelParams p = init_params(tiny_config());
  std::vector<TrainExample> batch = tiny_batch();
  std::vector<TrainExample> reversed(batch.rbegin(), batch.rend());
  CHECK(training_loss_value(p, batch, 0.1) ==
        doctest::Approx(training_loss_value(p, reversed, 0.1)).epsilon(1e-12));
}

TEST_CASE("analytic gradients match central differences on sampled entries") {
  ModelParams p = init_params(tiny_config());
  std::vector<TrainExample> batch = tiny_batch();
  const double alpha = 0.1;
  LossResult res = training_loss(p, batch, alpha);

  std::mt19937_64 rng(202);
  std::vector<ArrayRef> params = array_refs(p);
  std::vector<ArrayRef> grads = array_refs(res.grads);
  for (std::size_t a = 0; a < params.size(); ++a) {
    const Eigen::Index n = params[a].size();
    std::uniform_int_distribution<Eigen::Index> pick(0, n - 1);
    const int samples = static_cast<int>(std::min<Eigen::Index>(10, n));
    for (int s = 0; s < samples; ++s) {
      const Eigen::Index i = pick(rng);
      const double analytic = grads[a].data[i];
      const double numeric = numeric_grad(p, batch, alpha, &params[a].data[i]);
      const double rel =
          std::abs(analytic - numeric) / std::max(std::abs(analytic) + std::abs(numeric), 1e-3);
      CAPTURE(params[a].name);
      CAPTURE(i);
      CHECK(rel < 1e-3);
    }
  }
}

TEST_CASE("training is deterministic and reduces the loss") {
  ModelConfig c = tiny_config();
  c.vocab_size = kNumReserved + 8;
  std::vector<SentencePair> pairs;
  std::mt19937_64 rng(7);
  std::uniform_int_distribution<TokenId> tok(kNumReserved, c.vocab_size - 1);
  std::uniform_int_distribution<int> len(2, 6);
  for (int i = 0; i < 64; ++i) {
    std::vector<TokenId> s(static_cast<std::size_t>(len(rng)));
    for (auto& t : s) t = tok(rng);
    pairs.emplace_back(s, s);
  }
  TrainConfig tc;
  tc.steps = 120;
  tc.batch_size = 8;
  tc.log_every = 10;
  tc.seed = 9;

  ModelParams p1 = init_params(c);
  ModelParams p2 = init_params(c);
  auto trace1 = train(p1, pairs, tc);
  auto trace2 = train(p2, pairs, tc);
  REQUIRE(trace1.size() == trace2.size());
  for (std::size_t i = 0; i < trace1.size(); ++i) {
    CHECK(trace1[i].step == trace2[i].step);
    CHECK(trace1[i].loss == trace2[i].loss);  // bit-identical
  }
  CHECK(trace1.back().loss < trace1.front().loss);

  for (const ArrayRef& a : array_refs(p1)) {
    CHECK(Eigen::Map<Eigen::ArrayXd>(a.data, a.size()).isFinite().all());
  }
  CHECK_THROWS_WITH(train(p1, {}, tc), "empty corpus");
}
