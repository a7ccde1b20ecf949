// Copyright 2026 The embshape Authors
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

// embshape: command line front end.
//
// Exit status: 0 when every report row succeeded, 1 when any row is an
// error row, 2 on usage, configuration or input errors.

#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/core.h>

#include "embshape/aggregate.h"
#include "embshape/evaluate.h"
#include "embshape/experiment.h"
#include "embshape/models.h"
#include "embshape/postprocess.h"
#include "embshape/random_embed.h"
#include "embshape/store.h"
#include "embshape/tokenize.h"

namespace {

using namespace embshape;

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path + "' for writing", 0);
  out << text;
  if (!out) throw IoError("write to '" + path + "' failed", 0);
}

int emit(const std::vector<CellResult>& results, const std::string& csv_path,
         const std::string& md_path) {
  std::size_t errors = 0;
  for (const CellResult& r : results) {
    if (!r.ok()) {
      ++errors;
      std::cerr << "error: " << r.cell.provenance() << ": " << r.error << "\n";
      continue;
    }
    for (const std::string& w : r.report->warnings) {
      std::cerr << "warning: " << r.cell.provenance() << ": " << w << "\n";
    }
  }
  std::string csv = format_csv(results);
  if (csv_path.empty()) {
    std::cout << csv;
  } else {
    write_text(csv_path, csv);
  }
  if (!md_path.empty()) write_text(md_path, format_markdown(results));
  return errors == 0 ? 0 : 1;
}

// Options shared by the single-cell evaluation verbs.
struct CellOptions {
  std::string dump;
  std::string vocab;
  std::string agg = "avg";
  std::string post = "none";
  std::string layers = "12";
  std::string corpus;
  std::string corpus_dump;
  std::string stoplist;
  std::uint64_t seed = 0;
  std::string output;

  void add_to(CLI::App* app) {
    app->add_option("--dump", dump, "TED1 dump of the task sentences")
        ->required()
        ->check(CLI::ExistingFile);
    app->add_option("--vocab", vocab, "WordPiece vocabulary")
        ->required()
        ->check(CLI::ExistingFile);
    app->add_option("--agg", agg, "aggregation, e.g. avg, idf^W+biases")
        ->capture_default_str();
    app->add_option("--post", post, "post-processing chain, e.g. whiten^W,normalize")
        ->capture_default_str();
    app->add_option("--layers", layers, "comma-separated layer set")
        ->capture_default_str();
    app->add_option("--corpus", corpus, "raw corpus for idf^W and bias statistics")
        ->check(CLI::ExistingFile);
    app->add_option("--corpus-dump", corpus_dump,
                    "corpus dump for corpus-fitted post-processing")
        ->check(CLI::ExistingFile);
    app->add_option("--stoplist", stoplist, "frequent-token stoplist")
        ->check(CLI::ExistingFile);
    app->add_option("--seed", seed, "evaluation seed")->capture_default_str();
    app->add_option("--out", output, "CSV output path (default stdout)");
  }

  ExperimentConfig config(TaskConfig task) const {
    ExperimentConfig c;
    c.vocab = vocab;
    c.stoplist = stoplist;
    c.corpus.path = corpus;
    ModelConfig m;
    m.name = "dump";
    m.kind = ModelKind::kDump;
    m.dumps[task.name] = dump;
    m.corpus_dump = corpus_dump;
    c.models.push_back(m);
    c.tasks.push_back(std::move(task));
    c.aggregations = {agg};
    c.post = {post};
    c.layer_sets = {parse_layers(layers)};
    c.seed = seed;
    c.validate();
    return c;
  }
};

int run_config(const std::string& path, int workers, const std::string& out,
               const std::string& md) {
  ExperimentConfig config = ExperimentConfig::load(path);
  std::string csv_path = out.empty() ? config.output : out;
  std::string md_path = md.empty() ? config.markdown : md;
  Experiment experiment(std::move(config));
  return emit(experiment.run(workers), csv_path, md_path);
}

int run_single(const ExperimentConfig& config, const std::string& out) {
  Experiment experiment(config);
  return emit(experiment.run(), out, "");
}

int diag(const std::string& dump_path, const std::string& metric,
         const std::string& pairs_path, const std::string& vocab_path,
         const std::string& agg, const std::string& post,
         const std::string& layers, bool raw) {
  EmbeddingTensor tensor = read_dump_file(dump_path);
  AggregationSpec spec = parse_aggregation(agg);
  if (spec.weighting == Weighting::kIdf || spec.bias_filter) {
    throw ConfigError("diag supports uniform aggregation only; use run for "
                      "weighted variants");
  }
  spec.layers = parse_layers(layers);
  SpecialTokens specials;
  if (!vocab_path.empty()) {
    specials = Vocabulary::load_wordpiece(vocab_path).specials();
  }
  Warnings warnings;
  Matrix vectors = aggregate(tensor, spec, nullptr, TokenClassFlags({}, specials),
                             &warnings, default_worker_count());
  vectors = run_post_chain(parse_post_chain(post), vectors, nullptr, &warnings);
  for (const std::string& w : warnings.messages) std::cerr << "warning: " << w << "\n";
  double value = 0.0;
  if (metric == "isoscore") {
    value = iso_score(vectors);
  } else if (metric == "uniform") {
    value = uniformity(vectors, !raw);
  } else if (metric == "align") {
    if (pairs_path.empty()) throw ConfigError("diag --metric align needs --pairs");
    SentencePairSet pairs = read_pair_tsv_file(pairs_path);
    if (pairs.sentences.size() != tensor.sentence_count()) {
      throw FormatError(fmt::format("dump has {} sentences, pairs file has {}",
                                    tensor.sentence_count(), pairs.sentences.size()));
    }
    auto [a, b] = positive_pairs(pairs, vectors);
    value = alignment(a, b, !raw);
  } else {
    throw ConfigError("unknown metric '" + metric + "'");
  }
  std::cout << fmt::format("{}\t{}\n", metric, value);
  return 0;
}

int build_avg(const std::string& dump_path, const std::string& layers,
              const std::string& out) {
  std::ifstream in(dump_path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + dump_path + "'", 0);
  DumpReader reader(in);
  AvgTableBuilder builder(reader.dim(), parse_layers(layers));
  while (auto rec = reader.next()) builder.add(*rec, reader.layers());
  StaticTable table = builder.finish(dump_path);
  write_stt1_file(table, out);
  std::cerr << fmt::format("wrote {} tokens x {} dims to {}\n", table.size(),
                           table.dim(), out);
  return 0;
}

int re_dump(const std::string& vocab_path, const std::string& texts_path,
            const std::string& format, std::uint64_t seed, std::size_t dim,
            const std::string& out) {
  Vocabulary vocab = Vocabulary::load_wordpiece(vocab_path);
  std::vector<std::string> texts;
  if (format == "pairs") {
    texts = read_pair_tsv_file(texts_path).sentences;
  } else if (format == "labeled") {
    texts = read_labeled_tsv_file(texts_path).texts;
  } else {
    texts = read_corpus_sentences_file(texts_path, 0);
  }
  std::vector<std::vector<TokenId>> ids;
  ids.reserve(texts.size());
  for (const std::string& t : texts) ids.push_back(tokenize(t, vocab));
  write_dump_file(random_embed(ids, texts, seed, dim), out);
  std::cerr << fmt::format("wrote {} sentences to {}\n", texts.size(), out);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sentence embedding aggregation, post-processing and evaluation"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out;
  std::string md;
  int workers = 0;
  CLI::App* run = app.add_subcommand("run", "run an experiment grid from a JSON config");
  run->add_option("--config", config_path, "experiment config")
      ->required()
      ->check(CLI::ExistingFile);
  run->add_option("--workers", workers, "worker threads (default EMBSHAPE_THREADS)");
  run->add_option("--out", out, "CSV output path (overrides the config)");
  run->add_option("--markdown", md, "markdown output path (overrides the config)");

  CellOptions sts_opts;
  std::string pairs_path;
  CLI::App* sts = app.add_subcommand("eval-sts", "Spearman correlation on an STS pair file");
  sts_opts.add_to(sts);
  sts->add_option("--pairs", pairs_path, "pair TSV: score, sentence 1, sentence 2")
      ->required()
      ->check(CLI::ExistingFile);

  CellOptions cluster_opts;
  std::string labeled_path;
  int runs = 10;
  CLI::App* cluster =
      app.add_subcommand("eval-cluster", "k-means accuracy on a labeled text file");
  cluster_opts.add_to(cluster);
  cluster->add_option("--data", labeled_path, "labeled TSV: label, text")
      ->required()
      ->check(CLI::ExistingFile);
  cluster->add_option("--runs", runs, "k-means runs")->capture_default_str();

  std::string diag_dump;
  std::string metric;
  std::string diag_pairs;
  std::string diag_vocab;
  std::string diag_agg = "avg";
  std::string diag_post = "none";
  std::string diag_layers = "12";
  bool raw = false;
  CLI::App* diag_cmd = app.add_subcommand("diag", "isotropy and alignment/uniformity");
  diag_cmd->add_option("--dump", diag_dump, "TED1 dump")
      ->required()
      ->check(CLI::ExistingFile);
  diag_cmd->add_option("--metric", metric, "isoscore, align or uniform")
      ->required()
      ->check(CLI::IsMember({"isoscore", "align", "uniform"}));
  diag_cmd->add_option("--pairs", diag_pairs, "pair TSV matching the dump (align)")
      ->check(CLI::ExistingFile);
  diag_cmd->add_option("--vocab", diag_vocab, "vocabulary for framing-token ids")
      ->check(CLI::ExistingFile);
  diag_cmd->add_option("--agg", diag_agg, "aggregation")->capture_default_str();
  diag_cmd->add_option("--post", diag_post, "post-processing chain")
      ->capture_default_str();
  diag_cmd->add_option("--layers", diag_layers, "layer set")->capture_default_str();
  diag_cmd->add_flag("--raw", raw, "skip unit normalization for align/uniform");

  std::string avg_dump;
  std::string avg_layers;
  std::string avg_out;
  CLI::App* avg = app.add_subcommand("build-avg", "average token vectors over a corpus dump");
  avg->add_option("--dump", avg_dump, "corpus TED1 dump")
      ->required()
      ->check(CLI::ExistingFile);
  avg->add_option("--layers", avg_layers, "layer set, e.g. 12 or 1,12")->required();
  avg->add_option("--out", avg_out, "STT1 output path")->required();

  std::string re_vocab;
  std::string re_texts;
  std::string re_format = "pairs";
  std::uint64_t re_seed = 0;
  std::size_t re_dim = 768;
  std::string re_out;
  CLI::App* re = app.add_subcommand("re-dump", "random token embeddings as a TED1 dump");
  re->add_option("--vocab", re_vocab, "WordPiece vocabulary")
      ->required()
      ->check(CLI::ExistingFile);
  re->add_option("--texts", re_texts, "text source")->required()->check(CLI::ExistingFile);
  re->add_option("--format", re_format, "pairs, labeled or corpus")
      ->capture_default_str()
      ->check(CLI::IsMember({"pairs", "labeled", "corpus"}));
  re->add_option("--seed", re_seed, "random seed")->required();
  re->add_option("--dim", re_dim, "vector dimension")->capture_default_str();
  re->add_option("--out", re_out, "TED1 output path")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  try {
    if (*run) return run_config(config_path, workers, out, md);
    if (*sts) {
      TaskConfig task;
      task.name = "sts";
      task.kind = TaskKind::kSts;
      task.data = pairs_path;
      task.format = DataFormat::kPairs;
      return run_single(sts_opts.config(task), sts_opts.output);
    }
    if (*cluster) {
      TaskConfig task;
      task.name = "cluster";
      task.kind = TaskKind::kCluster;
      task.data = labeled_path;
      task.format = DataFormat::kLabeled;
      task.runs = runs;
      return run_single(cluster_opts.config(task), cluster_opts.output);
    }
    if (*diag_cmd) {
      return diag(diag_dump, metric, diag_pairs, diag_vocab, diag_agg, diag_post,
                  diag_layers, raw);
    }
    if (*avg) return build_avg(avg_dump, avg_layers, avg_out);
    if (*re) return re_dump(re_vocab, re_texts, re_format, re_seed, re_dim, re_out);
  } catch (const std::exception& e) {
    std::cerr << "embshape: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
