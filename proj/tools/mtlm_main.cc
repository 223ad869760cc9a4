// tools/mtlm_main.cc

// Copyright 2026  MTLM toolkit authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#include <atomic>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "mtlm/acoustic_sim.h"
#include "mtlm/checkpoint.h"
#include "mtlm/decoding.h"
#include "mtlm/errors.h"
#include "mtlm/evaluation.h"
#include "mtlm/grammar.h"
#include "mtlm/log.h"
#include "mtlm/model.h"
#include "mtlm/training.h"

namespace {

using namespace mtlm;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitData = 3;
constexpr int kExitRuntime = 4;

std::vector<std::string> read_lines(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path);
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) lines.push_back(line);
  return lines;
}

void write_lines(const std::string& path, const std::vector<std::string>& lines) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot open " + path + " for writing");
  for (const auto& l : lines) out << l << '\n';
}

std::string fmt_g17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

TokenMode parse_mode(const std::string& s) {
  if (s == "char") return TokenMode::kChar;
  if (s == "word") return TokenMode::kWord;
  throw DataError("unknown token mode: " + s);
}

std::array<double, 3> parse_weights(const std::string& s) {
  std::array<double, 3> w{};
  std::istringstream ss(s);
  std::string item;
  for (int i = 0; i < 3; ++i) {
    if (!std::getline(ss, item, ',')) throw DataError("expected three task weights");
    w[static_cast<std::size_t>(i)] = std::stod(item);
  }
  return w;
}

Model load_model(const std::string& ckpt_path, const Vocab& vocab) {
  const Checkpoint ck = load_checkpoint(ckpt_path);
  if (ck.vocab_fingerprint != vocab.fingerprint()) {
    throw DataError("checkpoint " + ckpt_path +
                    " was trained with a different vocabulary");
  }
  return ck.restore_model();
}

// ---------------------------------------------------------------------------
// shared option bundles
// ---------------------------------------------------------------------------

struct ChannelOptions {
  double eta = 0.3;
  std::uint64_t am_seed = 0;  // 0 means derive from --seed
  std::uint64_t resolved(std::uint64_t global_seed) const {
    return am_seed != 0 ? am_seed : global_seed + seed_offset::kAcousticChannel;
  }
};

void add_channel_options(CLI::App* cmd, ChannelOptions* opts) {
  cmd->add_option("--eta", opts->eta,
                  "synthetic channel noise mass in [0,1)")
      ->capture_default_str();
  cmd->add_option("--am-seed", opts->am_seed,
                  "channel seed base (default: seed + 4; per-utterance seeds "
                  "add the utterance index)");
}

struct DecodeSettings {
  std::size_t beam = 3;
  double lambda = 0.3;
  std::string guide = "s2s";
  std::size_t length_window = 2;

  BeamConfig beam_config() const {
    BeamConfig cfg;
    cfg.beam = beam;
    cfg.lambda = lambda;
    cfg.guide_mode = guide == "mtlm+s2s" ? GuideMode::kMtlmS2S : GuideMode::kS2S;
    cfg.length_window = length_window;
    return cfg;
  }
};

void add_decode_settings(CLI::App* cmd, DecodeSettings* opts) {
  cmd->add_option("--beam", opts->beam, "beam size")->capture_default_str();
  cmd->add_option("--lambda", opts->lambda, "LM weight in the combined score")
      ->capture_default_str();
  cmd->add_option("--guide-score", opts->guide,
                  "candidate-token selection rule")
      ->check(CLI::IsMember({"s2s", "mtlm+s2s"}))
      ->capture_default_str();
  cmd->add_option("--length-window", opts->length_window,
                  "admissible |length - estimate| for completions")
      ->capture_default_str();
}

// ---------------------------------------------------------------------------
// decode pipeline pieces shared by decode / nbest / sweep
// ---------------------------------------------------------------------------

struct Utterance {
  std::string id;
  std::string text;
  EncodedSequence ref;
};

std::vector<Utterance> load_references(const std::string& path, const Vocab& vocab) {
  const auto lines = read_lines(path);
  if (lines.empty()) throw DataError("no references in " + path);
  std::vector<Utterance> utts;
  utts.reserve(lines.size());
  for (std::size_t i = 0; i < lines.size(); ++i) {
    Utterance u;
    char buf[32];
    std::snprintf(buf, sizeof(buf), "utt-%04zu", i + 1);
    u.id = buf;
    u.text = lines[i];
    u.ref = encode(vocab, lines[i]);
    utts.push_back(std::move(u));
  }
  return utts;
}

struct FusionOutput {
  std::vector<std::string> transcripts;
  std::vector<std::string> score_lines;
  std::size_t failures = 0;
};

FusionOutput run_fusion(const std::vector<Utterance>& utts, const Model& lm,
                        const Vocab& vocab, const BeamConfig& cfg,
                        const ChannelOptions& channel, std::uint64_t seed) {
  FusionOutput out;
  for (std::size_t i = 0; i < utts.size(); ++i) {
    SyntheticAM am(utts[i].ref, channel.eta, channel.resolved(seed) + i,
                   vocab.size());
    Hypothesis best;
    try {
      best = shallow_fusion_decode(am, lm, cfg).best;
    } catch (const DecodeError& e) {
      ++out.failures;
      best = e.best_incomplete;
      MTLM_INFO("%s: no admissible completion; emitting best partial path",
                utts[i].id.c_str());
    }
    out.transcripts.push_back(decode(vocab, best.ids));
    out.score_lines.push_back(utts[i].id + "\t" + fmt_g17(best.am_score) + "\t" +
                              fmt_g17(best.lm_score) + "\t" +
                              fmt_g17(best.combined(cfg.lambda)));
  }
  return out;
}

// ---------------------------------------------------------------------------
// subcommands
// ---------------------------------------------------------------------------

struct GenCorpusArgs {
  std::size_t count = 500;
  std::uint64_t seed = 1;
  std::string out;
  GrammarConfig grammar;
};

int cmd_gen_corpus(const GenCorpusArgs& a) {
  write_lines(a.out, generate_sentences(a.count, a.seed, a.grammar));
  MTLM_INFO("wrote %zu sentences to %s", a.count, a.out.c_str());
  return kExitOk;
}

struct TrainArgs {
  std::string corpus;
  std::string mode = "char";
  std::string vocab_in;
  std::size_t max_vocab = 1000;
  std::string out_ckpt = "model.ckpt";
  std::string out_vocab = "vocab.txt";
  std::string loss_log = "loss_log.tsv";
  std::uint64_t seed = 1;
  std::string task_weights = "1,1,1";
  ModelConfig model_config;
  TrainConfig train_config;
  bool post_norm = false;
  bool sinusoidal = false;
  bool no_mask_embedding = false;
};

int cmd_train(TrainArgs a) {
  const TokenMode mode = parse_mode(a.mode);
  const auto lines = read_lines(a.corpus);
  Vocab vocab = a.vocab_in.empty()
                    ? Vocab::build_from_file(a.corpus, mode, a.max_vocab)
                    : Vocab::load(a.vocab_in, mode);
  a.model_config.vocab_size = vocab.size();
  a.model_config.pre_norm = !a.post_norm;
  a.model_config.learned_positions = !a.sinusoidal;
  a.model_config.mask_inputs = !a.no_mask_embedding;
  a.train_config.seed = a.seed;
  a.train_config.task_weights = parse_weights(a.task_weights);
  if (a.train_config.schedule.total_steps == 0) {
    a.train_config.schedule.total_steps = std::max<std::uint64_t>(1, a.train_config.total_steps);
  }

  std::size_t periodic = 0;
  const TrainResult result =
      train(lines, vocab, a.model_config, a.train_config,
            [&](const Checkpoint& ck) {
              ++periodic;
              save_checkpoint(a.out_ckpt + "." + std::to_string(ck.step), ck);
            });
  save_checkpoint(a.out_ckpt, result.final_checkpoint);
  vocab.save(a.out_vocab);
  write_loss_log(a.loss_log, result.log);
  MTLM_INFO("trained %llu steps (%zu periodic checkpoints, %zu skipped long, "
            "%zu skipped short)",
            static_cast<unsigned long long>(result.final_checkpoint.step), periodic,
            result.skipped_too_long, result.skipped_too_short);
  return kExitOk;
}

struct DecodeArgs {
  std::string ckpt;
  std::string vocab;
  std::string mode = "char";
  std::string refs;
  std::string out = "hyps.txt";
  std::string scores_out;
  std::uint64_t seed = 1;
  ChannelOptions channel;
  DecodeSettings settings;
};

int cmd_decode(const DecodeArgs& a) {
  const Vocab vocab = Vocab::load(a.vocab, parse_mode(a.mode));
  const Model lm = load_model(a.ckpt, vocab);
  const auto utts = load_references(a.refs, vocab);
  const FusionOutput out =
      run_fusion(utts, lm, vocab, a.settings.beam_config(), a.channel, a.seed);
  write_lines(a.out, out.transcripts);
  if (!a.scores_out.empty()) write_lines(a.scores_out, out.score_lines);
  MTLM_INFO("decoded %zu utterances (%zu without admissible completion)",
            utts.size(), out.failures);
  return kExitOk;
}

struct NBestArgs {
  std::string vocab;
  std::string mode = "char";
  std::string refs;
  std::string out = "nbest.txt";
  std::size_t n = 8;
  std::size_t beam = 8;
  std::uint64_t seed = 1;
  ChannelOptions channel;
};

int cmd_nbest(const NBestArgs& a) {
  const Vocab vocab = Vocab::load(a.vocab, parse_mode(a.mode));
  const auto utts = load_references(a.refs, vocab);
  std::vector<NBestEntry> entries;
  entries.reserve(utts.size());
  for (std::size_t i = 0; i < utts.size(); ++i) {
    SyntheticAM am(utts[i].ref, a.channel.eta, a.channel.resolved(a.seed) + i,
                   vocab.size());
    NBestEntry e;
    e.utt_id = utts[i].id;
    e.hyps = generate_nbest(am, a.n, a.beam);
    entries.push_back(std::move(e));
  }
  write_nbest(a.out, entries, vocab);
  MTLM_INFO("wrote %zu-best lists for %zu utterances to %s", a.n, utts.size(),
            a.out.c_str());
  return kExitOk;
}

struct RescoreArgs {
  std::string nbest;
  std::string ckpt;
  std::string vocab;
  std::string mode = "char";
  std::string rescore_mode = "uni";
  double lambda_rescore = 0.5;
  bool bi_exclude_eos = false;
  std::string out = "rescored.txt";
  std::string hyp_out;
};

int cmd_rescore(const RescoreArgs& a) {
  const Vocab vocab = Vocab::load(a.vocab, parse_mode(a.mode));
  const Model lm = load_model(a.ckpt, vocab);
  const RescoreMode mode = a.rescore_mode == "bi" ? RescoreMode::kBidirectional
                                                  : RescoreMode::kUnidirectional;
  auto entries = parse_nbest(a.nbest, vocab);
  std::vector<std::string> top_hyps;
  for (auto& e : entries) {
    e.hyps = rescore_nbest(e.hyps, lm, mode, a.lambda_rescore, !a.bi_exclude_eos);
    top_hyps.push_back(e.hyps.empty() ? "" : decode(vocab, e.hyps.front().ids));
  }
  write_nbest(a.out, entries, vocab);
  if (!a.hyp_out.empty()) write_lines(a.hyp_out, top_hyps);
  MTLM_INFO("rescored %zu utterances (%s mode)", entries.size(),
            a.rescore_mode.c_str());
  return kExitOk;
}

struct EvalArgs {
  std::string refs;
  std::string hyps;
  std::string system = "system";
  std::string out;
  bool table = false;
};

int cmd_eval(const EvalArgs& a) {
  const auto refs = read_lines(a.refs);
  const auto hyps = read_lines(a.hyps);
  const SystemReport report = evaluate_corpus(refs, hyps, a.system);
  const std::string tsv = report_tsv({report});
  if (!a.out.empty()) {
    std::ofstream out(a.out, std::ios::binary);
    if (!out) throw DataError("cannot open " + a.out + " for writing");
    out << tsv;
  }
  if (a.table || a.out.empty()) std::fputs(report_table({report}).c_str(), stdout);
  return kExitOk;
}

struct SweepArgs {
  std::string refs;
  std::string vocab;
  std::string mode = "char";
  std::string mtlm_ckpt;
  std::string unilm_ckpt;
  std::string beams = "1,2,4,8";
  std::string systems = "am,unilm_sf,mtlm_sf";
  double lambda = 0.3;
  double lambda_rescore = 0.5;
  std::size_t length_window = 2;
  std::string guide = "s2s";
  std::size_t jobs = 1;
  std::uint64_t seed = 1;
  std::string out = "sweep.csv";
  ChannelOptions channel;
};

std::vector<std::string> split_csv(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

int cmd_sweep(const SweepArgs& a) {
  const Vocab vocab = Vocab::load(a.vocab, parse_mode(a.mode));
  const auto utts = load_references(a.refs, vocab);
  std::vector<std::string> ref_texts;
  for (const auto& u : utts) ref_texts.push_back(u.text);

  const auto systems = split_csv(a.systems);
  std::vector<std::size_t> beams;
  for (const auto& b : split_csv(a.beams)) beams.push_back(std::stoul(b));
  if (beams.empty() || systems.empty()) throw DataError("empty sweep grid");

  const bool needs_mtlm =
      a.systems.find("mtlm") != std::string::npos;
  const bool needs_unilm = a.systems.find("unilm") != std::string::npos;
  Model mtlm_model, unilm_model;
  if (needs_mtlm) {
    if (a.mtlm_ckpt.empty()) throw DataError("--mtlm-ckpt required for MTLM systems");
    mtlm_model = load_model(a.mtlm_ckpt, vocab);
  }
  if (needs_unilm) {
    if (a.unilm_ckpt.empty()) throw DataError("--unilm-ckpt required for UNILM systems");
    unilm_model = load_model(a.unilm_ckpt, vocab);
  }

  struct Cell {
    std::size_t beam;
    std::string system;
  };
  std::vector<Cell> cells;
  for (std::size_t b : beams) {
    for (const auto& s : systems) cells.push_back({b, s});
  }
  std::vector<double> wer(cells.size(), 0.0);

  auto run_cell = [&](std::size_t ci) {
    const Cell& cell = cells[ci];
    std::vector<std::string> hyps;
    hyps.reserve(utts.size());
    for (std::size_t i = 0; i < utts.size(); ++i) {
      SyntheticAM am(utts[i].ref, a.channel.eta, a.channel.resolved(a.seed) + i,
                     vocab.size());
      std::vector<int> ids;
      if (cell.system == "am") {
        ids = generate_nbest(am, 1, cell.beam).front().ids;
      } else if (cell.system == "unilm_sf" || cell.system == "mtlm_sf") {
        const Model& lm = cell.system == "unilm_sf" ? unilm_model : mtlm_model;
        BeamConfig cfg;
        cfg.beam = cell.beam;
        cfg.lambda = a.lambda;
        cfg.length_window = a.length_window;
        cfg.guide_mode =
            a.guide == "mtlm+s2s" ? GuideMode::kMtlmS2S : GuideMode::kS2S;
        try {
          ids = shallow_fusion_decode(am, lm, cfg).best.ids;
        } catch (const DecodeError& e) {
          ids = e.best_incomplete.ids;
        }
      } else if (cell.system == "mtlm_uni" || cell.system == "mtlm_bi") {
        const auto list = generate_nbest(am, cell.beam, cell.beam);
        const RescoreMode mode = cell.system == "mtlm_bi"
                                     ? RescoreMode::kBidirectional
                                     : RescoreMode::kUnidirectional;
        ids = rescore_nbest(list, mtlm_model, mode, a.lambda_rescore).front().ids;
      } else {
        throw DataError("unknown sweep system: " + cell.system);
      }
      hyps.push_back(decode(vocab, ids));
    }
    wer[ci] = 100.0 * evaluate_corpus(ref_texts, hyps, cell.system).overall.wer();
  };

  if (a.jobs <= 1) {
    for (std::size_t ci = 0; ci < cells.size(); ++ci) run_cell(ci);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    const std::size_t workers = std::min(a.jobs, cells.size());
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t ci = next.fetch_add(1); ci < cells.size();
             ci = next.fetch_add(1)) {
          run_cell(ci);
        }
      });
    }
    for (auto& t : pool) t.join();
  }

  std::ofstream out(a.out, std::ios::binary);
  if (!out) throw DataError("cannot open " + a.out + " for writing");
  out << "beam,system,wer\n";
  for (std::size_t ci = 0; ci < cells.size(); ++ci) {
    char buf[128];
    std::snprintf(buf, sizeof(buf), "%zu,%s,%.4f\n", cells[ci].beam,
                  cells[ci].system.c_str(), wer[ci]);
    out << buf;
  }
  MTLM_INFO("sweep wrote %zu cells to %s", cells.size(), a.out.c_str());
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "mtlm: multi-task language-model training and ASR-decoding toolkit.\n"
      "All randomness flows from --seed with fixed per-component offsets:\n"
      "  +0 model init, +1 shuffling, +2 mask plans, +3 dropout,\n"
      "  +4 synthetic channel base (plus the utterance index).\n"
      "MTLM_LOG={error,info,debug} controls stderr logging."};
  app.require_subcommand(1);

  GenCorpusArgs gen;
  CLI::App* cmd_gen = app.add_subcommand(
      "gen-corpus", "Sample a synthetic regular-grammar corpus");
  cmd_gen->add_option("--count", gen.count, "sentences to generate")
      ->capture_default_str();
  cmd_gen->add_option("--seed", gen.seed, "generator seed")->capture_default_str();
  cmd_gen->add_option("--out", gen.out, "output corpus file")->required();
  cmd_gen->add_option("--min-words", gen.grammar.min_words)->capture_default_str();
  cmd_gen->add_option("--max-words", gen.grammar.max_words)->capture_default_str();
  cmd_gen->add_option("--min-syllables", gen.grammar.min_syllables)
      ->capture_default_str();
  cmd_gen->add_option("--max-syllables", gen.grammar.max_syllables)
      ->capture_default_str();

  TrainArgs tr;
  CLI::App* cmd_tr = app.add_subcommand("train", "Train an MTLM (or UNILM) model");
  cmd_tr->add_option("--corpus", tr.corpus, "training text, one sentence per line")
      ->required();
  cmd_tr->add_option("--mode", tr.mode, "tokenization mode")
      ->check(CLI::IsMember({"char", "word"}))
      ->capture_default_str();
  cmd_tr->add_option("--vocab", tr.vocab_in,
                     "existing vocabulary file (default: build from corpus)");
  cmd_tr->add_option("--max-vocab", tr.max_vocab, "vocabulary size cap")
      ->capture_default_str();
  cmd_tr->add_option("--steps", tr.train_config.total_steps, "training steps")
      ->capture_default_str();
  cmd_tr->add_option("--batch-size", tr.train_config.batch_size)
      ->capture_default_str();
  cmd_tr->add_option("--mask-rate", tr.train_config.mask_rate)
      ->capture_default_str();
  cmd_tr->add_option("--task-weights", tr.task_weights,
                     "ULM,UMLM,BMLM loss weights; 1,0,0 trains the UNILM baseline")
      ->capture_default_str();
  cmd_tr->add_option("--layers", tr.model_config.n_layers)->capture_default_str();
  cmd_tr->add_option("--heads", tr.model_config.n_heads)->capture_default_str();
  cmd_tr->add_option("--d-model", tr.model_config.d_model)->capture_default_str();
  cmd_tr->add_option("--d-ff", tr.model_config.d_ff)->capture_default_str();
  cmd_tr->add_option("--max-len", tr.model_config.max_len)->capture_default_str();
  cmd_tr->add_option("--dropout", tr.model_config.dropout)->capture_default_str();
  cmd_tr->add_option("--activation", tr.model_config.activation)
      ->check(CLI::IsMember({"gelu", "relu"}))
      ->capture_default_str();
  cmd_tr->add_flag("--post-norm", tr.post_norm, "post-norm block wiring");
  cmd_tr->add_flag("--sinusoidal-positions", tr.sinusoidal,
                   "fixed sinusoidal positions instead of learned");
  cmd_tr->add_flag("--no-mask-embedding", tr.no_mask_embedding,
                   "attention-only masking (no <mask> input replacement)");
  cmd_tr->add_option("--warmup-steps", tr.train_config.schedule.warmup_steps)
      ->capture_default_str();
  cmd_tr->add_option("--peak-lr", tr.train_config.schedule.peak_lr)
      ->capture_default_str();
  cmd_tr->add_option("--min-lr", tr.train_config.schedule.min_lr)
      ->capture_default_str();
  cmd_tr->add_option("--lr-total-steps", tr.train_config.schedule.total_steps,
                     "schedule horizon (default: --steps)")
      ->capture_default_str();
  cmd_tr->add_option("--grad-clip", tr.train_config.grad_clip,
                     "global-norm gradient clip, 0 = off")
      ->capture_default_str();
  cmd_tr->add_option("--weight-decay", tr.train_config.weight_decay,
                     "decoupled weight decay, 0 = off")
      ->capture_default_str();
  cmd_tr->add_option("--seed", tr.seed, "root seed")->capture_default_str();
  cmd_tr->add_option("--log-interval", tr.train_config.log_interval)
      ->capture_default_str();
  cmd_tr->add_option("--ckpt-interval", tr.train_config.checkpoint_interval,
                     "periodic checkpoint interval, 0 = final only")
      ->capture_default_str();
  cmd_tr->add_option("--out-ckpt", tr.out_ckpt)->capture_default_str();
  cmd_tr->add_option("--out-vocab", tr.out_vocab)->capture_default_str();
  cmd_tr->add_option("--loss-log", tr.loss_log)->capture_default_str();

  DecodeArgs de;
  CLI::App* cmd_de = app.add_subcommand(
      "decode", "Shallow-fusion beam search against the synthetic channel");
  cmd_de->add_option("--ckpt", de.ckpt, "LM checkpoint")->required();
  cmd_de->add_option("--vocab", de.vocab, "vocabulary file")->required();
  cmd_de->add_option("--mode", de.mode)->check(CLI::IsMember({"char", "word"}))
      ->capture_default_str();
  cmd_de->add_option("--refs", de.refs, "reference transcriptions (channel truth)")
      ->required();
  cmd_de->add_option("--out", de.out, "decoded transcripts")->capture_default_str();
  cmd_de->add_option("--scores-out", de.scores_out,
                     "per-utterance score TSV (utt, am, lm, combined)");
  cmd_de->add_option("--seed", de.seed)->capture_default_str();
  add_channel_options(cmd_de, &de.channel);
  add_decode_settings(cmd_de, &de.settings);

  NBestArgs nb;
  CLI::App* cmd_nb = app.add_subcommand(
      "nbest", "Acoustic-only n-best lists from the synthetic channel");
  cmd_nb->add_option("--vocab", nb.vocab)->required();
  cmd_nb->add_option("--mode", nb.mode)->check(CLI::IsMember({"char", "word"}))
      ->capture_default_str();
  cmd_nb->add_option("--refs", nb.refs)->required();
  cmd_nb->add_option("--out", nb.out)->capture_default_str();
  cmd_nb->add_option("-n,--n", nb.n, "list depth")->capture_default_str();
  cmd_nb->add_option("--beam", nb.beam)->capture_default_str();
  cmd_nb->add_option("--seed", nb.seed)->capture_default_str();
  add_channel_options(cmd_nb, &nb.channel);

  RescoreArgs re;
  CLI::App* cmd_re = app.add_subcommand("rescore", "Re-rank an n-best list with the LM");
  cmd_re->add_option("--nbest", re.nbest, "n-best file")->required();
  cmd_re->add_option("--ckpt", re.ckpt)->required();
  cmd_re->add_option("--vocab", re.vocab)->required();
  cmd_re->add_option("--mode", re.mode)->check(CLI::IsMember({"char", "word"}))
      ->capture_default_str();
  cmd_re->add_option("--rescore-mode", re.rescore_mode,
                     "uni (causal) or bi (per-position masked)")
      ->check(CLI::IsMember({"uni", "bi"}))
      ->capture_default_str();
  cmd_re->add_option("--lambda-rescore", re.lambda_rescore)->capture_default_str();
  cmd_re->add_flag("--bi-exclude-eos", re.bi_exclude_eos,
                   "drop the end-sentinel term from bidirectional scores");
  cmd_re->add_option("--out", re.out, "rescored n-best file")->capture_default_str();
  cmd_re->add_option("--hyp-out", re.hyp_out, "top-1 transcripts after rescoring");

  EvalArgs ev;
  CLI::App* cmd_ev = app.add_subcommand("eval", "WER and error-type report");
  cmd_ev->add_option("--refs", ev.refs)->required();
  cmd_ev->add_option("--hyps", ev.hyps)->required();
  cmd_ev->add_option("--system", ev.system, "label for the report rows")
      ->capture_default_str();
  cmd_ev->add_option("--out", ev.out, "machine-readable TSV report");
  cmd_ev->add_flag("--table", ev.table, "also print the aligned table");

  SweepArgs sw;
  CLI::App* cmd_sw = app.add_subcommand(
      "sweep", "Decode + eval over a (beam x system) grid, CSV output");
  cmd_sw->add_option("--refs", sw.refs)->required();
  cmd_sw->add_option("--vocab", sw.vocab)->required();
  cmd_sw->add_option("--mode", sw.mode)->check(CLI::IsMember({"char", "word"}))
      ->capture_default_str();
  cmd_sw->add_option("--mtlm-ckpt", sw.mtlm_ckpt, "checkpoint for mtlm_* systems");
  cmd_sw->add_option("--unilm-ckpt", sw.unilm_ckpt, "checkpoint for unilm_* systems");
  cmd_sw->add_option("--beams", sw.beams, "comma-separated beam sizes")
      ->capture_default_str();
  cmd_sw->add_option("--systems", sw.systems,
                     "subset of am,unilm_sf,mtlm_sf,mtlm_uni,mtlm_bi")
      ->capture_default_str();
  cmd_sw->add_option("--lambda", sw.lambda)->capture_default_str();
  cmd_sw->add_option("--lambda-rescore", sw.lambda_rescore)->capture_default_str();
  cmd_sw->add_option("--length-window", sw.length_window)->capture_default_str();
  cmd_sw->add_option("--guide-score", sw.guide)
      ->check(CLI::IsMember({"s2s", "mtlm+s2s"}))
      ->capture_default_str();
  cmd_sw->add_option("--jobs", sw.jobs, "parallel worker count")
      ->capture_default_str();
  cmd_sw->add_option("--seed", sw.seed)->capture_default_str();
  cmd_sw->add_option("--out", sw.out)->capture_default_str();
  add_channel_options(cmd_sw, &sw.channel);

  for (CLI::App* sub : app.get_subcommands({})) {
    sub->set_config("--config", "", "key = value config file; flags win");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*cmd_gen) return cmd_gen_corpus(gen);
    if (*cmd_tr) return cmd_train(tr);
    if (*cmd_de) return cmd_decode(de);
    if (*cmd_nb) return cmd_nbest(nb);
    if (*cmd_re) return cmd_rescore(re);
    if (*cmd_ev) return cmd_eval(ev);
    if (*cmd_sw) return cmd_sweep(sw);
  } catch (const DataError& e) {
    MTLM_ERROR("%s", e.what());
    return kExitData;
  } catch (const std::exception& e) {
    MTLM_ERROR("%s", e.what());
    return kExitRuntime;
  }
  return kExitUsage;
}
