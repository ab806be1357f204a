// g2: graph construction, training, decoding and evaluation driver.

#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "g2/annotation.h"
#include "g2/checkpoint.h"
#include "g2/config.h"
#include "g2/file_util.h"
#include "g2/grad_check.h"
#include "g2/graph.h"
#include "g2/graph_io.h"
#include "g2/metrics.h"
#include "g2/model.h"
#include "g2/training.h"
#include "g2/vocab.h"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitNumeric = 3;

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NumericFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct RunConfig {
  g2::ModelConfig model;
  g2::TrainConfig train;
  g2::BuilderConfig builder;
};

RunConfig LoadRunConfig(const std::string& path) {
  g2::KeyValues kv = path.empty() ? g2::KeyValues() : g2::KeyValues::FromFile(path);
  if (const char* seed = std::getenv("G2_SEED")) kv.Set("seed", seed);
  RunConfig rc;
  rc.model = g2::ModelConfigFromKeyValues(kv);
  rc.train = g2::TrainConfigFromKeyValues(kv);
  rc.builder = g2::BuilderConfigFromKeyValues(kv);
  rc.train.Validate();
  return rc;
}

std::vector<g2::TrainExample> MakeExamples(const std::vector<g2::AnnotatedDocument>& docs,
                                           const g2::Vocab& vocab, const RunConfig& rc) {
  std::vector<g2::TrainExample> examples;
  for (const g2::AnnotatedDocument& doc : docs) {
    try {
      examples.push_back(g2::MakeTrainExample(doc, vocab, rc.builder, rc.model));
    } catch (const g2::EmptyGraph&) {
      std::cerr << "skipping " << doc.id << ": empty graph\n";
    }
  }
  if (examples.empty()) throw g2::EmptyCorpus();
  return examples;
}

int BuildGraphs(const std::string& in, const std::string& out,
                const g2::BuilderConfig& cfg) {
  const std::vector<g2::AnnotatedDocument> docs = g2::ParseAnnotationFile(in);
  std::vector<std::optional<std::string>> lines(docs.size());
  std::vector<std::exception_ptr> errors(docs.size());
  const size_t workers = std::clamp<size_t>(std::thread::hardware_concurrency(), 1, 8);
  std::vector<std::thread> threads;
  for (size_t w = 0; w < workers; ++w) {
    threads.emplace_back([&, w] {
      for (size_t i = w; i < docs.size(); i += workers) {
        try {
          g2::GroundGraphResult r = g2::BuildGroundGraph(docs[i], cfg);
          lines[i] = g2::SerializeGraphRecord(
              {docs[i].id, std::move(r.graph), std::move(r.alignment)});
        } catch (const g2::EmptyGraph&) {
        } catch (...) {
          errors[i] = std::current_exception();
        }
      }
    });
  }
  for (std::thread& t : threads) t.join();
  std::string text;
  for (size_t i = 0; i < docs.size(); ++i) {
    if (errors[i]) std::rethrow_exception(errors[i]);
    if (!lines[i]) {
      std::cerr << "skipping " << docs[i].id << ": empty graph\n";
      continue;
    }
    text += *lines[i] + "\n";
  }
  g2::WriteFileAtomic(out, text);
  return kExitOk;
}

int PrintStats(const std::string& in) {
  std::vector<g2::GroundGraph> graphs;
  for (g2::GraphRecord& r : g2::ReadGraphRecords(in)) graphs.push_back(std::move(r.graph));
  const g2::GraphStats s = g2::ComputeGraphStats(graphs);
  std::printf("graphs %zu\navg_nodes %.4f\navg_edges %.4f\n", graphs.size(), s.avg_nodes,
              s.avg_edges);
  return kExitOk;
}

int Export(const std::string& in, const std::string& out, const std::string& format,
           const std::string& id) {
  std::string text;
  bool found = false;
  for (const g2::GraphRecord& r : g2::ReadGraphRecords(in)) {
    if (!id.empty() && r.id != id) continue;
    found = true;
    text += format == "dot" ? g2::ExportDot(r.graph, r.id) : g2::ExportJson(r.graph) + "\n";
  }
  if (!id.empty() && !found) throw std::invalid_argument("no graph with id " + id);
  g2::WriteFileAtomic(out, text);
  return kExitOk;
}

int Train(const std::string& config, const std::string& data, const std::string& out,
          std::string metrics) {
  RunConfig rc = LoadRunConfig(config);
  const std::vector<g2::AnnotatedDocument> docs = g2::ParseAnnotationFile(data);
  if (docs.empty()) throw g2::EmptyCorpus();
  g2::Checkpoint ckpt;
  ckpt.vocab = g2::Vocab::Build(docs);
  rc.model.vocab_size = ckpt.vocab.size();
  rc.model.Validate();
  ckpt.model = rc.model;
  ckpt.train = rc.train;
  ckpt.builder = g2::EffectiveBuilderConfig(rc.builder, rc.model);
  const std::vector<g2::TrainExample> examples = MakeExamples(docs, ckpt.vocab, rc);
  if (metrics.empty()) metrics = out + ".metrics.jsonl";

  std::string log;
  g2::TrainHooks hooks;
  hooks.on_step = [&](const g2::StepRecord& r) {
    log += g2::SerializeStepRecord(r) + "\n";
    std::fprintf(stderr, "step %zu loss %.6f\n", r.step, r.loss);
  };
  hooks.on_checkpoint = [&](const g2::ModelParams& params, size_t step) {
    ckpt.params = params;
    ckpt.step = step;
    g2::SaveCheckpoint(ckpt, out);
    g2::WriteFileAtomic(metrics, log);
  };
  try {
    g2::TrainLoop(examples, rc.train, rc.model, g2::InitModel(rc.model, rc.train.seed),
                  hooks);
  } catch (const g2::NonFiniteLoss& e) {
    throw NumericFailure(e.what());
  }
  return kExitOk;
}

int GenerateResponses(const std::string& ckpt_path, const std::string& in,
                      const std::string& out, size_t beam, size_t max_len) {
  const g2::Checkpoint ckpt = g2::LoadCheckpoint(ckpt_path);
  const std::vector<g2::AnnotatedDocument> docs = g2::ParseAnnotationFile(in);
  std::vector<g2::ModelInput> inputs;
  std::vector<size_t> slot;  // index into inputs, or npos for empty graphs
  for (const g2::AnnotatedDocument& doc : docs) {
    try {
      inputs.push_back(g2::MakeModelInput(doc, ckpt.vocab, ckpt.builder, ckpt.model));
      slot.push_back(inputs.size() - 1);
    } catch (const g2::EmptyGraph&) {
      std::cerr << "no graph for " << doc.id << "; emitting an empty response\n";
      slot.push_back(std::string::npos);
    }
  }
  g2::GenerateOptions options;
  options.max_len = max_len;
  if (beam > 1) {
    options.mode = g2::DecodeMode::kBeam;
    options.beam_size = beam;
  }
  const auto responses = g2::GenerateAll(ckpt.params, ckpt.model, inputs, ckpt.vocab, options);
  std::string text;
  for (size_t s : slot) {
    if (s != std::string::npos) text += g2::JoinWords(responses[s]);
    text += "\n";
  }
  g2::WriteFileAtomic(out, text);
  return kExitOk;
}

int Evaluate(const std::string& hyp_path, const std::string& ref_path,
             const std::string& out) {
  const std::vector<std::string> hyps = g2::ReadLines(hyp_path);
  const std::vector<std::string> refs = g2::ReadLines(ref_path);
  if (hyps.size() != refs.size()) {
    throw std::invalid_argument("hypothesis and reference files differ in length (" +
                                std::to_string(hyps.size()) + " vs " +
                                std::to_string(refs.size()) + ")");
  }
  std::vector<g2::EvalPair> pairs;
  for (size_t i = 0; i < hyps.size(); ++i) {
    g2::EvalPair p{g2::Tokenize(hyps[i]), g2::Tokenize(refs[i])};
    if (p.reference.empty()) {
      throw std::invalid_argument("empty reference on line " + std::to_string(i + 1));
    }
    pairs.push_back(std::move(p));
  }
  const std::pair<std::string, g2::EvalScores> row{"system", g2::Evaluate(pairs)};
  const std::string table = g2::FormatEvalTable({&row, 1});
  std::cout << table;
  if (!out.empty()) g2::WriteFileAtomic(out, table);
  return kExitOk;
}

int Ablate(const std::string& config, const std::string& data, const std::string& out) {
  RunConfig rc = LoadRunConfig(config);
  const std::vector<g2::AnnotatedDocument> docs = g2::ParseAnnotationFile(data);
  if (docs.empty()) throw g2::EmptyCorpus();
  const g2::Vocab vocab = g2::Vocab::Build(docs);
  rc.model.vocab_size = vocab.size();
  rc.model.Validate();
  std::vector<g2::AblationRow> rows;
  try {
    rows = g2::RunAblationSuite(docs, vocab, rc.builder, rc.model, rc.train);
  } catch (const g2::NonFiniteLoss& e) {
    throw NumericFailure(e.what());
  }
  const std::string table = g2::FormatAblationTable(rows);
  std::cout << table;
  if (!out.empty()) g2::WriteFileAtomic(out, table);
  return kExitOk;
}

int GradCheck(size_t dims, size_t heads, uint64_t seed, double epsilon, double tolerance) {
  if (heads == 0 || dims % heads != 0) {
    throw UsageError("--dims must be divisible by --heads");
  }
  g2::GradCheckFixture fixture = g2::MakeGradCheckFixture(dims, heads, seed);
  const g2::GradCheckReport r = g2::CheckModelGradients(fixture, epsilon);
  std::printf("checked %zu\nmax_relative_error %.3e\nworst %s[%zu] analytic %.9e numeric %.9e\n",
              r.checked, r.max_relative_error, r.worst_parameter.c_str(), r.worst_index,
              r.analytic, r.numeric);
  if (!(r.max_relative_error <= tolerance)) {
    throw NumericFailure("gradient check above tolerance " + std::to_string(tolerance));
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Ground graph construction and graph-aware response generation"};
  app.require_subcommand(1);

  auto* build = app.add_subcommand("build-graph", "annotations -> graph records");
  std::string build_in, build_out, build_config;
  bool no_sp = false, no_pc = false, no_mc = false, no_ga = false;
  std::optional<size_t> max_nodes;
  build->add_option("--in", build_in, "annotation JSONL")->required();
  build->add_option("--out", build_out, "graph records JSONL")->required();
  build->add_option("--config", build_config, "key = value builder config");
  build->add_flag("--no-sp", no_sp, "skip short-circuiting prepositions");
  build->add_flag("--no-pc", no_pc, "skip parallel coordination");
  build->add_flag("--no-mc", no_mc, "skip coreference merging");
  build->add_flag("--no-ga", no_ga, "skip graph augmentation");
  build->add_option("--max-nodes", max_nodes, "node cap")->check(CLI::PositiveNumber);

  auto* stats = app.add_subcommand("stats", "average node and edge counts");
  std::string stats_in;
  stats->add_option("--in", stats_in, "graph records JSONL")->required();

  auto* exp = app.add_subcommand("export", "graph records -> JSON or DOT");
  std::string exp_in, exp_out, exp_format = "json", exp_id;
  exp->add_option("--in", exp_in, "graph records JSONL")->required();
  exp->add_option("--out", exp_out, "output file")->required();
  exp->add_option("--format", exp_format, "json or dot")
      ->check(CLI::IsMember({"json", "dot"}));
  exp->add_option("--id", exp_id, "only this record");

  auto* train = app.add_subcommand("train", "train a model");
  std::string train_config, train_data, train_out, train_metrics;
  train->add_option("--config", train_config, "key = value config")->required();
  train->add_option("--data", train_data, "annotation JSONL with responses")->required();
  train->add_option("--out", train_out, "checkpoint path")->required();
  train->add_option("--metrics", train_metrics, "per-step JSONL (default <out>.metrics.jsonl)");

  auto* gen = app.add_subcommand("generate", "decode responses");
  std::string gen_ckpt, gen_in, gen_out;
  size_t beam = 1, max_len = 64;
  gen->add_option("--ckpt", gen_ckpt, "checkpoint")->required();
  gen->add_option("--in", gen_in, "annotation JSONL")->required();
  gen->add_option("--out", gen_out, "one response per line")->required();
  gen->add_option("--beam", beam, "beam size (1 = greedy)")->check(CLI::PositiveNumber);
  gen->add_option("--max-len", max_len, "maximum response length");

  auto* eval = app.add_subcommand("eval", "BLEU-1..4 and ROUGE-1/2/L");
  std::string eval_hyp, eval_ref, eval_out;
  eval->add_option("--hyp", eval_hyp, "hypotheses, one per line")->required();
  eval->add_option("--ref", eval_ref, "references, one per line")->required();
  eval->add_option("--out", eval_out, "also write the table here");

  auto* ablate = app.add_subcommand("ablate", "train and score the eight variants");
  std::string ablate_config, ablate_data, ablate_out;
  ablate->add_option("--config", ablate_config, "key = value config")->required();
  ablate->add_option("--data", ablate_data, "annotation JSONL with responses")->required();
  ablate->add_option("--out", ablate_out, "also write the report here");

  auto* grad = app.add_subcommand("grad-check", "finite-difference gradient check");
  size_t dims = 8, heads = 2;
  uint64_t seed = 1;
  double epsilon = 1e-5, tolerance = 1e-4;
  grad->add_option("--dims", dims, "d_model")->check(CLI::PositiveNumber);
  grad->add_option("--heads", heads, "attention heads")->check(CLI::PositiveNumber);
  grad->add_option("--seed", seed, "initialization seed");
  grad->add_option("--epsilon", epsilon, "finite-difference step")
      ->check(CLI::Range(1e-7, 1e-3));
  grad->add_option("--tolerance", tolerance, "maximum relative error");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*build) {
      g2::BuilderConfig cfg = build_config.empty() ? g2::BuilderConfig()
                                                   : g2::BuilderConfigFromFile(build_config);
      if (no_sp) cfg.short_circuit = false;
      if (no_pc) cfg.coordination = false;
      if (no_mc) cfg.coreference = false;
      if (no_ga) cfg.augment = false;
      if (max_nodes) cfg.max_nodes = *max_nodes;
      return BuildGraphs(build_in, build_out, cfg);
    }
    if (*stats) return PrintStats(stats_in);
    if (*exp) return Export(exp_in, exp_out, exp_format, exp_id);
    if (*train) return Train(train_config, train_data, train_out, train_metrics);
    if (*gen) return GenerateResponses(gen_ckpt, gen_in, gen_out, beam, max_len);
    if (*eval) return Evaluate(eval_hyp, eval_ref, eval_out);
    if (*ablate) return Ablate(ablate_config, ablate_data, ablate_out);
    if (*grad) {
      if (const char* s = std::getenv("G2_SEED")) seed = std::strtoull(s, nullptr, 10);
      return GradCheck(dims, heads, seed, epsilon, tolerance);
    }
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const NumericFailure& e) {
    std::cerr << "numeric failure: " << e.what() << "\n";
    return kExitNumeric;
  } catch (const g2::NonFiniteLoss& e) {
    std::cerr << "numeric failure: " << e.what() << "\n";
    return kExitNumeric;
  } catch (const g2::AnnotationError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kExitData;
  } catch (const std::exception& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kExitData;
  }
  return kExitUsage;
}
