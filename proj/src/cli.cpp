// SPDX-License-Identifier: Apache-2.0
#include "lat/cli.hpp"

#include <CLI11.hpp>
#include <chrono>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <random>
#include <sstream>
#include <thread>

#include "lat/checkpoint.hpp"
#include "lat/decode.hpp"
#include "lat/merge.hpp"
#include "lat/metrics.hpp"
#include "lat/model.hpp"
#include "lat/pieces_io.hpp"
#include "lat/vocab.hpp"

namespace lat::cli {

namespace {

constexpr int kFailure = 2;

std::vector<std::string> read_lines(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("file not found: " + path);
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(f, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(line);
  }
  return lines;
}

void write_lines(const std::string& path, const std::vector<std::string>& lines) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw std::runtime_error("cannot write: " + path);
  for (const auto& line : lines) f << line << '\n';
}

void echo_config(const CLI::App& sub) {
  std::istringstream is("resolved config [" + sub.get_name() + "]\n" +
                        sub.config_to_str(true, false));
  std::string line;
  while (std::getline(is, line)) {
    if (!line.empty()) std::cerr << "# " << line << '\n';
  }
}

struct SharedArgs {
  std::uint64_t seed = 1;
  int k = 3;
  int threads = 1;
  std::string config_path;
};

void add_shared(CLI::App& sub, SharedArgs& shared) {
  sub.option_defaults()->always_capture_default();
  sub.add_option("--seed", shared.seed, "RNG seed");
  sub.add_option("--k", shared.k, "local translation steps (K)");
  sub.add_option("--threads", shared.threads, "worker threads (1 = serial)")
      ->check(CLI::PositiveNumber);
  sub.add_option("--config", shared.config_path, "flat key=value config file");
}

// flat key=value file; command-line flags win over file values
void apply_config_file(CLI::App& sub, const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("file not found: " + path);
  std::string line;
  int line_no = 0;
  while (std::getline(f, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw std::runtime_error(path + ":" + std::to_string(line_no) + ": expected key=value");
    }
    const std::string key = line.substr(0, eq);
    const std::string value = line.substr(eq + 1);
    if (key == "config") continue;
    CLI::Option* opt = sub.get_option_no_throw("--" + key);
    if (opt == nullptr) {
      throw std::runtime_error(path + ":" + std::to_string(line_no) +
                               ": unknown config key '" + key + "'");
    }
    if (opt->count() > 0) continue;  // explicit flag takes precedence
    std::istringstream values(value);
    std::string item;
    while (values >> item) opt->add_result(item);
    opt->run_callback();
  }
}

void require_option(const std::string& value, const char* flag) {
  if (value.empty()) throw std::runtime_error(std::string("missing required ") + flag);
}

// ---------------------------------------------------------------------- train

struct TrainArgs {
  SharedArgs shared;
  std::string src, tgt, checkpoint, vocab_path, loss_log;
  int min_count = 1;
  int d_model = 32, heads = 2, ffn_dim = 64, max_len = 64;
  TrainConfig train_cfg;
};

int cmd_train(const TrainArgs& a) {
  require_option(a.src, "--src");
  require_option(a.tgt, "--tgt");
  require_option(a.checkpoint, "--checkpoint");
  const std::vector<std::string> src_lines = read_lines(a.src);
  const std::vector<std::string> tgt_lines = read_lines(a.tgt);
  if (src_lines.size() != tgt_lines.size()) throw std::runtime_error("corpus length mismatch");

  std::vector<std::string> all = src_lines;
  all.insert(all.end(), tgt_lines.begin(), tgt_lines.end());
  const Vocabulary vocab = Vocabulary::build(all, a.min_count);

  std::vector<SentencePair> pairs;
  pairs.reserve(src_lines.size());
  for (std::size_t i = 0; i < src_lines.size(); ++i) {
    pairs.emplace_back(vocab.encode(src_lines[i]), vocab.encode(tgt_lines[i]));
  }

  ModelConfig mc;
  mc.d_model = a.d_model;
  mc.heads = a.heads;
  mc.ffn_dim = a.ffn_dim;
  mc.k_steps = a.shared.k;
  mc.max_len = a.max_len;
  mc.vocab_size = vocab.size();
  mc.seed = a.shared.seed;

  TrainConfig tc = a.train_cfg;
  tc.seed = a.shared.seed;

  ModelParams params = init_params(mc);
  const std::vector<TraceEntry> trace = train(params, pairs, tc);

  save_checkpoint(params, a.checkpoint);
  if (!a.vocab_path.empty()) vocab.save(a.vocab_path);
  if (!a.loss_log.empty()) {
    std::ofstream f(a.loss_log, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("cannot write: " + a.loss_log);
    f << "step\tloss\n" << std::setprecision(17);
    for (const TraceEntry& e : trace) f << e.step << '\t' << e.loss << '\n';
  }
  if (!trace.empty()) {
    std::cerr << "# trained " << tc.steps << " steps, final batch loss "
              << trace.back().loss << '\n';
  }
  return 0;
}

// --------------------------------------------------------------------- decode

struct DecodeArgs {
  SharedArgs shared;
  std::string checkpoint, vocab_path, src, out;
  int iterations = 4;
  int length_offset = 0;
  bool latency = false;
  bool k_given = false;
};

int cmd_decode(const DecodeArgs& a) {
  require_option(a.checkpoint, "--checkpoint");
  require_option(a.vocab_path, "--vocab");
  require_option(a.src, "--src");
  require_option(a.out, "--out");
  const ModelParams params = load_checkpoint(a.checkpoint);
  const Vocabulary vocab = Vocabulary::load(a.vocab_path);
  if (vocab.size() != params.config.vocab_size) {
    throw std::runtime_error("vocabulary size disagrees with checkpoint");
  }
  const std::vector<std::string> src_lines = read_lines(a.src);

  DecodeConfig dc;
  dc.iterations = a.iterations;
  dc.k = a.k_given ? a.shared.k : 0;
  dc.length_offset = a.length_offset;
  dc.seed = a.shared.seed;

  std::vector<std::string> out(src_lines.size());
  std::vector<DecodeStageTimes> times(src_lines.size());
  const auto wall_start = std::chrono::steady_clock::now();

  auto worker = [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      std::vector<TokenId> src = vocab.encode(src_lines[i]);
      if (static_cast<int>(src.size()) + 1 > params.config.max_len) {
        src.resize(static_cast<std::size_t>(params.config.max_len - 1));
      }
      const std::vector<TokenId> ids = iterative_decode(params, src, dc, &times[i]);
      if (ids.empty()) std::cerr << "# warning: empty translation at line " << i + 1 << '\n';
      out[i] = vocab.decode(ids);
    }
  };
  const int threads = std::min<int>(a.shared.threads, static_cast<int>(src_lines.size()));
  if (threads <= 1) {
    worker(0, src_lines.size());
  } else {
    std::vector<std::thread> pool;
    const std::size_t chunk = (src_lines.size() + threads - 1) / threads;
    for (int t = 0; t < threads; ++t) {
      const std::size_t begin = static_cast<std::size_t>(t) * chunk;
      const std::size_t end = std::min(src_lines.size(), begin + chunk);
      if (begin < end) pool.emplace_back(worker, begin, end);
    }
    for (auto& th : pool) th.join();
  }
  const double wall_s = std::chrono::duration<double>(
                            std::chrono::steady_clock::now() - wall_start)
                            .count();

  write_lines(a.out, out);

  if (a.latency) {
    DecodeStageTimes sum{};
    for (const auto& t : times) {
      sum.model_s += t.model_s;
      sum.merge_s += t.merge_s;
      sum.adjust_s += t.adjust_s;
    }
    const double n = std::max<std::size_t>(1, src_lines.size());
    std::cout << std::fixed << std::setprecision(3);
    std::cout << "latency_ms_per_sentence\t" << 1000.0 * wall_s / n << '\n'
              << "stage_model_ms\t" << 1000.0 * sum.model_s / n << '\n'
              << "stage_merge_ms\t" << 1000.0 * sum.merge_s / n << '\n'
              << "stage_adjust_ms\t" << 1000.0 * sum.adjust_s / n << '\n';
  }
  return 0;
}

// ---------------------------------------------------------------------- merge

struct MergeArgs {
  SharedArgs shared;
  std::string pieces_path, out;
};

int cmd_merge(const MergeArgs& a) {
  require_option(a.pieces_path, "--pieces");
  require_option(a.out, "--out");
  const std::vector<std::string> lines = read_lines(a.pieces_path);
  MergeConfig mc{a.shared.k, std::log(0.25)};

  // token interning; reserved renderings map to reserved ids so EOS/PAD
  // fixtures truncate the same way model pieces do
  std::unordered_map<std::string, TokenId> intern;
  std::vector<std::string> names{"⟨pad⟩",  "⟨sop⟩", "⟨mask⟩",
                                 "⟨eos⟩",  "⟨unk⟩", "⟨length⟩"};
  for (TokenId i = 0; i < kNumReserved; ++i) intern.emplace(names[static_cast<std::size_t>(i)], i);
  auto intern_id = [&](const std::string& tok) {
    auto [it, fresh] = intern.emplace(tok, static_cast<TokenId>(names.size()));
    if (fresh) names.push_back(tok);
    return it->second;
  };

  std::vector<std::string> out;
  out.reserve(lines.size());
  for (std::size_t ln = 0; ln < lines.size(); ++ln) {
    std::vector<TextPiece> text_pieces;
    try {
      text_pieces = parse_piece_line(lines[ln]);
    } catch (const std::exception& e) {
      throw std::runtime_error("line " + std::to_string(ln + 1) + ": " + e.what());
    }
    if (text_pieces.empty()) {
      std::cerr << "# warning: line " << ln + 1 << ": empty piece list\n";
      out.emplace_back();
      continue;
    }
    std::vector<Piece> pieces;
    for (std::size_t i = 0; i < text_pieces.size(); ++i) {
      std::vector<TokenId> ids;
      std::vector<double> scores;
      for (const auto& [tok, score] : text_pieces[i]) {
        const TokenId id = intern_id(tok);
        // truncate at the first terminator, like model-generated pieces
        if (id == kEosId || id == kPadId) break;
        ids.push_back(id);
        scores.push_back(score);
      }
      pieces.push_back(make_piece(static_cast<int>(i), ids, scores));
    }
    const MergedSequence merged = merge_all(pieces, mc);
    std::string joined;
    for (const ScoredToken& tok : merged.tokens) {
      if (!joined.empty()) joined += ' ';
      joined += names[static_cast<std::size_t>(tok.token)];
    }
    out.push_back(std::move(joined));
  }
  write_lines(a.out, out);
  return 0;
}

// ----------------------------------------------------------------------- eval

struct EvalArgs {
  SharedArgs shared;
  std::string hyp, ref;
  int nrr_window = 0;
  std::vector<int> bucket_edges{10, 20, 30, 40};
};

int cmd_eval(const EvalArgs& a) {
  require_option(a.hyp, "--hyp");
  require_option(a.ref, "--ref");
  const std::vector<std::string> hyp_lines = read_lines(a.hyp);
  const std::vector<std::string> ref_lines = read_lines(a.ref);
  if (hyp_lines.size() != ref_lines.size()) throw std::runtime_error("corpus length mismatch");

  std::vector<std::vector<std::string>> hyps, refs;
  for (const auto& l : hyp_lines) hyps.push_back(split_whitespace(l));
  for (const auto& l : ref_lines) refs.push_back(split_whitespace(l));

  std::cout << "metric\tvalue\tcount\n" << std::fixed << std::setprecision(4);
  std::cout << "bleu\t" << corpus_bleu(hyps, refs) << '\t' << hyps.size() << '\n';
  for (int n = 1; n <= 4; ++n) {
    long long starts = 0;
    for (const auto& h : hyps) {
      starts += std::max<long long>(0, static_cast<long long>(h.size()) - n + 1);
    }
    std::cout << "nrr_" << n << '\t' << ngram_repeat_rate(hyps, {n, a.nrr_window}) << '\t'
              << starts << '\n';
  }
  for (const BucketRow& row : bucket_report(refs, hyps, a.bucket_edges)) {
    std::cout << "bleu[" << row.lo << ',';
    if (row.hi == std::numeric_limits<int>::max()) {
      std::cout << "inf)";
    } else {
      std::cout << row.hi << ')';
    }
    std::cout << '\t';
    if (row.has_value) {
      std::cout << row.bleu;
    } else {
      std::cout << "n/a";
    }
    std::cout << '\t' << row.count << '\n';
  }
  return 0;
}

// ---------------------------------------------------------------- bench-merge

struct BenchArgs {
  SharedArgs shared;
  std::vector<int> sizes{1000, 2000, 4000, 8000};
  std::vector<int> ks{2, 3, 4, 5, 6};
  int repeats = 5;
};

std::vector<Piece> synth_pieces(std::mt19937_64& rng, int n_pieces, int k) {
  // reference with runs capped at k-1 so merging stays in its normal regime
  std::uniform_int_distribution<TokenId> tok(kNumReserved, kNumReserved + 31);
  std::vector<TokenId> ref;
  ref.reserve(static_cast<std::size_t>(n_pieces + k));
  while (static_cast<int>(ref.size()) < n_pieces + k - 1) {
    const TokenId t = tok(rng);
    const std::size_t len = ref.size();
    if (k > 1 && len >= static_cast<std::size_t>(k - 1)) {
      bool run = true;
      for (int b = 1; b < k; ++b) run = run && ref[len - static_cast<std::size_t>(b)] == t;
      if (run) continue;
    }
    ref.push_back(t);
  }
  std::vector<Piece> pieces;
  pieces.reserve(static_cast<std::size_t>(n_pieces));
  for (int i = 0; i < n_pieces; ++i) {
    std::vector<TokenId> ids(ref.begin() + i,
                             ref.begin() + std::min<std::size_t>(ref.size(), i + k));
    pieces.push_back(make_piece(i, ids, std::vector<double>(ids.size(), -0.1)));
  }
  return pieces;
}

int cmd_bench_merge(const BenchArgs& a) {
  std::cout << "k\tpieces\tbest_ms\tpieces_per_s\n" << std::fixed << std::setprecision(3);
  for (int k : a.ks) {
    for (int n : a.sizes) {
      std::mt19937_64 rng(a.shared.seed + static_cast<std::uint64_t>(k) * 1000003u +
                          static_cast<std::uint64_t>(n));
      const std::vector<Piece> pieces = synth_pieces(rng, n, k);
      MergeConfig mc{k, std::log(0.25)};
      double best_s = std::numeric_limits<double>::infinity();
      for (int r = 0; r < a.repeats; ++r) {
        const auto start = std::chrono::steady_clock::now();
        const MergedSequence merged = merge_all(pieces, mc);
        const double s =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        if (merged.tokens.empty()) throw std::runtime_error("bench produced empty merge");
        best_s = std::min(best_s, s);
      }
      std::cout << k << '\t' << n << '\t' << 1000.0 * best_s << '\t'
                << static_cast<double>(n) / best_s << '\n';
    }
  }
  return 0;
}

}  // namespace

int run(const std::vector<std::string>& args) {
  CLI::App app{"local autoregressive translation toolkit"};
  app.require_subcommand(1);

  TrainArgs train_args;
  CLI::App* train_cmd = app.add_subcommand("train", "train the toy model");
  add_shared(*train_cmd, train_args.shared);
  train_cmd->add_option("--src", train_args.src, "source corpus");
  train_cmd->add_option("--tgt", train_args.tgt, "target corpus");
  train_cmd->add_option("--checkpoint", train_args.checkpoint, "checkpoint output");
  train_cmd->add_option("--vocab", train_args.vocab_path, "vocabulary output");
  train_cmd->add_option("--loss-log", train_args.loss_log, "TSV loss trace output");
  train_cmd->add_option("--min-count", train_args.min_count, "vocabulary frequency cutoff");
  train_cmd->add_option("--d-model", train_args.d_model, "model width");
  train_cmd->add_option("--heads", train_args.heads, "attention heads");
  train_cmd->add_option("--ffn-dim", train_args.ffn_dim, "feed-forward width");
  train_cmd->add_option("--max-len", train_args.max_len, "maximum sequence length");
  train_cmd->add_option("--steps", train_args.train_cfg.steps, "training steps");
  train_cmd->add_option("--lr", train_args.train_cfg.lr, "learning rate");
  train_cmd->add_option("--batch-size", train_args.train_cfg.batch_size, "batch size");
  train_cmd->add_option("--alpha", train_args.train_cfg.alpha, "unmasked-token loss weight");
  train_cmd->add_option("--delete-frac", train_args.train_cfg.delete_frac,
                        "deletion augmentation fraction");
  train_cmd->add_option("--grad-clip", train_args.train_cfg.grad_clip, "gradient norm clip");
  train_cmd->add_option("--log-every", train_args.train_cfg.log_every, "loss trace stride");

  DecodeArgs decode_args;
  CLI::App* decode_cmd = app.add_subcommand("decode", "translate a source file");
  add_shared(*decode_cmd, decode_args.shared);
  decode_cmd->add_option("--checkpoint", decode_args.checkpoint, "model checkpoint");
  decode_cmd->add_option("--vocab", decode_args.vocab_path, "vocabulary file");
  decode_cmd->add_option("--src", decode_args.src, "source file");
  decode_cmd->add_option("--out", decode_args.out, "translations output");
  decode_cmd->add_option("--iterations", decode_args.iterations, "mask-predict iterations (T)");
  decode_cmd->add_option("--length-offset", decode_args.length_offset,
                         "offset added to the predicted length");
  decode_cmd->add_flag("--latency", decode_args.latency, "report per-sentence latency");

  MergeArgs merge_args;
  CLI::App* merge_cmd = app.add_subcommand("merge", "merge pieces from a JSONL file");
  add_shared(*merge_cmd, merge_args.shared);
  merge_cmd->add_option("--pieces", merge_args.pieces_path, "JSONL piece file");
  merge_cmd->add_option("--out", merge_args.out, "merged text output");

  EvalArgs eval_args;
  CLI::App* eval_cmd = app.add_subcommand("eval", "score hypotheses against references");
  add_shared(*eval_cmd, eval_args.shared);
  eval_cmd->add_option("--hyp", eval_args.hyp, "hypothesis file");
  eval_cmd->add_option("--ref", eval_args.ref, "reference file");
  eval_cmd->add_option("--nrr-window", eval_args.nrr_window,
                       "repeat window (0 = n-gram order)");
  eval_cmd->add_option("--buckets", eval_args.bucket_edges, "length bucket edges");

  BenchArgs bench_args;
  CLI::App* bench_cmd = app.add_subcommand("bench-merge", "merge throughput benchmark");
  add_shared(*bench_cmd, bench_args.shared);
  bench_cmd->add_option("--sizes", bench_args.sizes, "piece counts");
  bench_cmd->add_option("--ks", bench_args.ks, "window sizes");
  bench_cmd->add_option("--repeats", bench_args.repeats, "timing repeats");

  std::vector<const char*> argv;
  argv.push_back("lat");
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (train_cmd->parsed()) {
      if (!train_args.shared.config_path.empty()) {
        apply_config_file(*train_cmd, train_args.shared.config_path);
      }
      echo_config(*train_cmd);
      return cmd_train(train_args);
    }
    if (decode_cmd->parsed()) {
      if (!decode_args.shared.config_path.empty()) {
        apply_config_file(*decode_cmd, decode_args.shared.config_path);
      }
      decode_args.k_given = decode_cmd->count("--k") > 0;
      echo_config(*decode_cmd);
      return cmd_decode(decode_args);
    }
    if (merge_cmd->parsed()) {
      if (!merge_args.shared.config_path.empty()) {
        apply_config_file(*merge_cmd, merge_args.shared.config_path);
      }
      echo_config(*merge_cmd);
      return cmd_merge(merge_args);
    }
    if (eval_cmd->parsed()) {
      if (!eval_args.shared.config_path.empty()) {
        apply_config_file(*eval_cmd, eval_args.shared.config_path);
      }
      echo_config(*eval_cmd);
      return cmd_eval(eval_args);
    }
    if (bench_cmd->parsed()) {
      if (!bench_args.shared.config_path.empty()) {
        apply_config_file(*bench_cmd, bench_args.shared.config_path);
      }
      echo_config(*bench_cmd);
      return cmd_bench_merge(bench_args);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kFailure;
  }
  return 0;
}

}  // namespace lat::cli
