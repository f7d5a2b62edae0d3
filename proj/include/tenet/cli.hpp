// Copyright 2026 The TENet-KWS Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// `tenet` command-line front end. Exit codes: 0 success, 1 usage error,
// 2 data error, 3 numeric failure. Diagnostics go to `err`.

#pragma once

#include <CLI11.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "tenet/audio.hpp"
#include "tenet/container.hpp"
#include "tenet/dataset.hpp"
#include "tenet/fusion.hpp"
#include "tenet/model.hpp"
#include "tenet/train.hpp"

namespace tenet {

enum ExitCode : int { kExitOk = 0, kExitUsage = 1, kExitData = 2, kExitNumeric = 3 };

inline int exit_code_for(Errc code) {
  switch (code) {
    case Errc::invalid_argument: return kExitUsage;
    case Errc::numeric: return kExitNumeric;
    default: return kExitData;
  }
}

namespace detail {

inline void write_text(const std::string& path, const std::string& text) { atomic_write(path, text); }

struct CliOptions {
  // shared
  std::string in, out, model, data, variant = "tenet12", mtconv, split = "test", scores, metrics;
  std::uint64_t seed = 0;
  // train
  bool toy = false, no_augment = false;
  std::size_t iters = 2000, batch = 100, eval_every = 500, toy_items = 40;
  double lr = 0.01, target_acc = 0.0;
  // count
  std::size_t frames = 98;
};

inline DepthwiseKind kind_from(const std::string& mtconv) {
  return mtconv.empty() ? DepthwiseKind::standard() : DepthwiseKind::parse(mtconv);
}

inline int cmd_mfcc(const CliOptions& o, std::ostream& out) {
  const auto features = compute_mfcc(load_wav(o.in));
  save_feature_map(o.out, features, "mfcc");
  out << "wrote " << features.frames() << "x1x" << features.channels() << " MFCC to " << o.out << '\n';
  return kExitOk;
}

inline int cmd_train(const CliOptions& o, std::ostream& out, std::ostream& err) {
  require(o.toy != !o.data.empty(), Errc::invalid_argument, "train needs exactly one of --data DIR or --toy");
  Corpus corpus = o.toy ? make_toy_corpus(o.seed, o.toy_items)
                        : scan_corpus(o.data, ScanConfig{{}, 10.0, 10.0, o.seed});
  for (const auto& w : corpus.warnings) err << "warning: " << w << '\n';

  TrainConfig cfg;
  cfg.total_iterations = o.iters;
  cfg.batch_size = o.batch;
  cfg.learning_rate = o.lr;
  cfg.eval_every = o.eval_every;
  cfg.augment = !o.no_augment;
  cfg.target_train_accuracy = o.target_acc;
  cfg.seed = o.seed;

  const auto model = build_model<float>(variant_spec(o.variant, kind_from(o.mtconv)), o.seed);
  const auto result = train(model, corpus, cfg, [&](const MetricRow& r) {
    out << "iter " << r.iteration << " lr " << r.lr << " loss " << r.loss << " val_acc " << r.val_accuracy << '\n';
  });
  save_model(o.out, result.best);
  std::ostringstream csv;
  write_metrics_csv(csv, result.log);
  const std::string metrics = o.metrics.empty() ? o.out + ".metrics.csv" : o.metrics;
  write_text(metrics, csv.str());
  out << "best val_acc " << result.best_val_accuracy << " at iter " << result.best_iteration << "; saved "
      << o.out << '\n';
  return kExitOk;
}

inline int cmd_fuse(const CliOptions& o, std::ostream& out) {
  const auto fused = fuse_model(load_model(o.in));
  save_model(o.out, fused);
  out << "fused " << fused.spec.name << " -> " << fused.spec.depthwise().to_string() << "; saved " << o.out << '\n';
  return kExitOk;
}

inline int cmd_infer(const CliOptions& o, std::ostream& out) {
  const auto model = load_model(o.model);
  const auto pred = forward(model, compute_mfcc(load_wav(o.in)));
  std::vector<std::size_t> order(pred.probs.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return pred.probs[a] > pred.probs[b]; });
  out << std::fixed << std::setprecision(6);
  for (auto c : order) out << class_name(c) << ':' << pred.probs[c] << '\n';
  return kExitOk;
}

inline int cmd_count(const CliOptions& o, std::ostream& out) {
  count_report(variant_spec(o.variant, kind_from(o.mtconv)), o.frames).write_csv(out);
  return kExitOk;
}

inline int cmd_eval(const CliOptions& o, std::ostream& out) {
  const auto model = load_model(o.model);
  const Corpus corpus = scan_corpus(o.data, ScanConfig{{}, 10.0, 10.0, o.seed});
  const auto result = evaluate(model, corpus, parse_split(o.split));
  std::ostringstream csv;
  write_scores_csv(csv, result.scores);
  const std::string scores = o.scores.empty() ? "scores.csv" : o.scores;
  write_text(scores, csv.str());
  out << "accuracy " << std::setprecision(6) << result.accuracy << " (" << result.scores.size() << " items); scores -> "
      << scores << '\n';
  return kExitOk;
}

inline int cmd_roc(const CliOptions& o, std::ostream& out) {
  std::ifstream in(o.scores);
  require(static_cast<bool>(in), Errc::io, "cannot open " + o.scores);
  const auto points = roc_points(read_scores_csv(in));
  std::ostringstream csv;
  write_roc_csv(csv, points);
  if (o.out.empty())
    out << csv.str();
  else
    write_text(o.out, csv.str());
  return kExitOk;
}

inline int cmd_toy_gen(const CliOptions& o, std::ostream& out) {
  const Corpus corpus = make_toy_corpus(o.seed, o.toy_items);
  write_corpus(corpus, o.out);
  out << "wrote toy corpus (" << corpus.items.size() << " items, silence synthesised at scan time) to " << o.out
      << '\n';
  return kExitOk;
}

}  // namespace detail

inline int run_cli(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  using detail::CliOptions;
  CLI::App app{"TENet keyword spotting: MFCC frontend, training, MTConv kernel fusion, inference"};
  app.require_subcommand(1);
  CliOptions o;

  auto* mfcc = app.add_subcommand("mfcc", "compute MFCC features of a WAV clip");
  mfcc->add_option("--in", o.in, "input WAV (16 kHz mono PCM16)")->required();
  mfcc->add_option("--out", o.out, "output feature container")->required();

  auto* train = app.add_subcommand("train", "train a TENet variant");
  train->add_option("--data", o.data, "corpus root (keyword/clip.wav layout)");
  train->add_flag("--toy", o.toy, "use the built-in synthetic corpus");
  train->add_option("--variant", o.variant, "tenet6 | tenet12 | tenet6-narrow | tenet12-narrow");
  train->add_option("--mtconv", o.mtconv, "MTConv branch kernel sizes, e.g. 3,5,7,9");
  train->add_option("--iters", o.iters, "training iterations");
  train->add_option("--batch", o.batch, "batch size");
  train->add_option("--lr", o.lr, "initial learning rate");
  train->add_option("--eval-every", o.eval_every, "validation cadence in iterations");
  train->add_option("--toy-items", o.toy_items, "toy corpus items per class");
  train->add_option("--target-train-acc", o.target_acc, "stop once training accuracy reaches this");
  train->add_flag("--no-augment", o.no_augment, "disable noise / time-shift augmentation");
  train->add_option("--seed", o.seed, "random seed");
  train->add_option("--out", o.out, "output model container")->required();
  train->add_option("--metrics", o.metrics, "metrics CSV (default <out>.metrics.csv)");

  auto* fuse = app.add_subcommand("fuse", "collapse MTConv branches into standard depthwise convs");
  fuse->add_option("--in", o.in, "input model")->required();
  fuse->add_option("--out", o.out, "output model")->required();

  auto* infer = app.add_subcommand("infer", "classify one WAV clip");
  infer->add_option("--model", o.model, "model container")->required();
  infer->add_option("--in", o.in, "input WAV")->required();

  auto* count = app.add_subcommand("count", "parameter / multiply report as CSV");
  count->add_option("--variant", o.variant, "variant name")->required();
  count->add_option("--frames", o.frames, "input frames");
  count->add_option("--mtconv", o.mtconv, "MTConv branch sizes (counted in fused form)");

  auto* eval = app.add_subcommand("eval", "accuracy on a corpus split and a scores CSV");
  eval->add_option("--model", o.model, "model container")->required();
  eval->add_option("--data", o.data, "corpus root")->required();
  eval->add_option("--split", o.split, "train | validation | test");
  eval->add_option("--scores", o.scores, "scores CSV path (default scores.csv)");
  eval->add_option("--seed", o.seed, "seed for unknown / silence sampling");

  auto* roc = app.add_subcommand("roc", "FAR / FRR sweep from a scores CSV");
  roc->add_option("--scores", o.scores, "scores CSV")->required();
  roc->add_option("--out", o.out, "output CSV (default stdout)");

  auto* toy = app.add_subcommand("toy-gen", "write the synthetic corpus as WAV files");
  toy->add_option("--out", o.out, "output directory")->required();
  toy->add_option("--seed", o.seed, "random seed");
  toy->add_option("--items", o.toy_items, "items per class");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return kExitUsage;
  }

  try {
    if (*mfcc) return detail::cmd_mfcc(o, out);
    if (*train) return detail::cmd_train(o, out, err);
    if (*fuse) return detail::cmd_fuse(o, out);
    if (*infer) return detail::cmd_infer(o, out);
    if (*count) return detail::cmd_count(o, out);
    if (*eval) return detail::cmd_eval(o, out);
    if (*roc) return detail::cmd_roc(o, out);
    if (*toy) return detail::cmd_toy_gen(o, out);
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return exit_code_for(e.code());
  } catch (const std::filesystem::filesystem_error& e) {
    err << "error: " << e.what() << '\n';
    return kExitData;
  }
  err << app.help();
  return kExitUsage;
}

}  // namespace tenet
