#include "g2/checkpoint.h"

#include <cstdio>
#include <cstdlib>
#include <sstream>

#include "g2/file_util.h"
#include "g2/graph_io.h"
#include "json.hpp"

namespace g2 {

namespace {

constexpr const char* kMagic = "G2-CKPT 1";

void WriteSection(std::string& out, const std::string& name, const KeyValues& kv) {
  out += "[" + name + "]\n";
  for (const auto& [k, v] : kv.values()) out += k + " = " + v + "\n";
}

std::string_view GroupName(ParamGroup g) {
  return g == ParamGroup::kGraphRelevant ? "graph" : "other";
}

class LineReader {
 public:
  explicit LineReader(const std::string& text) : in_(text) {}

  std::string Next() {
    std::string line;
    if (!std::getline(in_, line)) throw CheckpointError("truncated checkpoint");
    ++line_no_;
    return line;
  }
  bool Peek(std::string& line) {
    const auto pos = in_.tellg();
    if (!std::getline(in_, line)) return false;
    in_.seekg(pos);
    return true;
  }
  size_t line_no() const { return line_no_; }

 private:
  std::istringstream in_;
  size_t line_no_ = 0;
};

KeyValues ReadSection(LineReader& r, const std::string& name) {
  if (r.Next() != "[" + name + "]") {
    throw CheckpointError("expected section [" + name + "] at line " +
                          std::to_string(r.line_no()));
  }
  std::string body, line;
  while (r.Peek(line) && !line.starts_with("[")) body += r.Next() + "\n";
  return KeyValues::Parse(body);
}

}  // namespace

std::string SerializeCheckpoint(const Checkpoint& ckpt) {
  std::string out = std::string(kMagic) + "\n";
  KeyValues model, train, meta;
  WriteModelConfig(ckpt.model, model);
  WriteTrainConfig(ckpt.train, train);
  meta.Set("step", std::to_string(ckpt.step));
  WriteSection(out, "model", model);
  WriteSection(out, "builder", BuilderConfigToKeyValues(ckpt.builder));
  WriteSection(out, "train", train);
  WriteSection(out, "meta", meta);
  out += "[vocab] " + std::to_string(ckpt.vocab.size()) + "\n";
  for (const std::string& w : ckpt.vocab.words()) out += nlohmann::json(w).dump() + "\n";
  const auto& params = ckpt.params.store.all();
  out += "[params] " + std::to_string(params.size()) + "\n";
  char buf[40];
  for (const Parameter& p : params) {
    out += "param " + p.name + " " + std::string(GroupName(p.group)) + " " +
           std::to_string(p.value.rows()) + " " + std::to_string(p.value.cols()) + "\n";
    for (size_t i = 0; i < p.value.size(); ++i) {
      std::snprintf(buf, sizeof buf, "%.17g", p.value[i]);
      out += (i ? " " : "") + std::string(buf);
    }
    out += "\n";
  }
  out += "end\n";
  return out;
}

Checkpoint ParseCheckpoint(const std::string& text) {
  LineReader r(text);
  if (r.Next() != kMagic) throw CheckpointError("not a checkpoint (bad header)");
  Checkpoint ckpt;
  try {
    ckpt.model = ModelConfigFromKeyValues(ReadSection(r, "model"));
    ckpt.builder = BuilderConfigFromKeyValues(ReadSection(r, "builder"));
    ckpt.train = TrainConfigFromKeyValues(ReadSection(r, "train"));
    ckpt.step = static_cast<size_t>(ReadSection(r, "meta").GetInt("step", 0));
  } catch (const ConfigError& e) {
    throw CheckpointError(e.what());
  }

  size_t count = 0;
  if (std::sscanf(r.Next().c_str(), "[vocab] %zu", &count) != 1) {
    throw CheckpointError("expected [vocab] at line " + std::to_string(r.line_no()));
  }
  std::vector<std::string> words;
  for (size_t i = 0; i < count; ++i) {
    try {
      words.push_back(nlohmann::json::parse(r.Next()).get<std::string>());
    } catch (const nlohmann::json::exception&) {
      throw CheckpointError("bad vocabulary entry at line " + std::to_string(r.line_no()));
    }
  }
  try {
    ckpt.vocab = Vocab(words);
  } catch (const std::invalid_argument& e) {
    throw CheckpointError(e.what());
  }
  if (ckpt.vocab.size() != ckpt.model.vocab_size) {
    throw CheckpointError("vocabulary size disagrees with the model config");
  }

  try {
    ckpt.params = InitModel(ckpt.model, 0);
  } catch (const InvalidConfig& e) {
    throw CheckpointError(e.what());
  }
  auto& params = ckpt.params.store.all();
  if (std::sscanf(r.Next().c_str(), "[params] %zu", &count) != 1 ||
      count != params.size()) {
    throw CheckpointError("parameter count disagrees with the model config");
  }
  for (Parameter& p : params) {
    std::istringstream header(r.Next());
    std::string tag, name, group;
    size_t rows = 0, cols = 0;
    header >> tag >> name >> group >> rows >> cols;
    if (tag != "param" || name != p.name || group != GroupName(p.group) ||
        rows != p.value.rows() || cols != p.value.cols()) {
      throw CheckpointError("parameter " + p.name + " does not match line " +
                            std::to_string(r.line_no()));
    }
    std::istringstream values(r.Next());
    for (size_t i = 0; i < p.value.size(); ++i) {
      std::string token;
      if (!(values >> token)) throw CheckpointError("short values for " + p.name);
      char* end = nullptr;
      p.value[i] = std::strtod(token.c_str(), &end);
      if (end != token.c_str() + token.size()) {
        throw CheckpointError("bad value in " + p.name);
      }
    }
    std::string extra;
    if (values >> extra) throw CheckpointError("extra values for " + p.name);
    p.ZeroGrad();
  }
  if (r.Next() != "end") throw CheckpointError("missing end marker");
  return ckpt;
}

void SaveCheckpoint(const Checkpoint& ckpt, const std::filesystem::path& path) {
  WriteFileAtomic(path, SerializeCheckpoint(ckpt));
}

Checkpoint LoadCheckpoint(const std::filesystem::path& path) {
  return ParseCheckpoint(ReadFile(path));
}

}  // namespace g2
