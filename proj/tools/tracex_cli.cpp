// tracex command line front end; talks to the library through the C API only.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "tracex/tracex.h"

namespace {

using json = nlohmann::ordered_json;

struct Owned {
  char* s = nullptr;
  ~Owned() { tracex_string_free(s); }
  std::string str() const { return s ? s : ""; }
};

int fail(tracex_status st) {
  std::cerr << "tracex: error: " << tracex_last_error() << "\n";
  return static_cast<int>(st);
}

std::string read_file(const std::string& path, bool& ok) {
  std::ifstream f(path, std::ios::binary);
  ok = static_cast<bool>(f);
  std::ostringstream s;
  s << f.rdbuf();
  return s.str();
}

struct AnalyzeArgs {
  std::string config_file;
  std::vector<std::string> manifests;
  std::string preproc, bpe_model, vectorizer, embeddings, out, experiment, orphan_metric;
  long long dim = 0, window = 0, negatives = 0, epochs = 0, min_count = 0, case_k = 0, threads = 0;
  double lr = 0, orphan_quantile = 0;
  unsigned long long seed = 0;
};

// Adds the options shared by analyze and train-embeddings.
void add_run_options(CLI::App* cmd, AnalyzeArgs& a) {
  cmd->add_option("--config", a.config_file, "JSON run config; flags override its keys");
  cmd->add_option("-m,--manifest", a.manifests, "testbed manifest (repeatable)");
  cmd->add_option("--preproc", a.preproc, "conventional | bpe8k | bpe32k");
  cmd->add_option("--bpe-model", a.bpe_model, "pre-trained BPE model (JSON)");
  cmd->add_option("--dim", a.dim, "embedding dimension");
  cmd->add_option("--window", a.window, "context window");
  cmd->add_option("--negatives", a.negatives, "negative samples per update");
  cmd->add_option("--epochs", a.epochs, "training epochs");
  cmd->add_option("--lr", a.lr, "initial learning rate");
  cmd->add_option("--min-count", a.min_count, "minimum token frequency");
  cmd->add_option("--seed", a.seed, "seed for every stochastic step");
}

bool build_config(CLI::App* cmd, const AnalyzeArgs& a, std::string& out, std::string& err) {
  json j = json::object();
  if (!a.config_file.empty()) {
    bool ok = false;
    const auto text = read_file(a.config_file, ok);
    if (!ok) {
      err = "cannot read config file " + a.config_file;
      return false;
    }
    try {
      j = json::parse(text);
    } catch (const json::exception& e) {
      err = std::string("config file is not valid JSON: ") + e.what();
      return false;
    }
  }
  auto given = [&](const char* flag) { return cmd->get_option_no_throw(flag) && cmd->count(flag) > 0; };
  if (given("--manifest")) j["manifests"] = a.manifests;
  if (given("--preproc")) j["preproc"] = a.preproc;
  if (given("--bpe-model")) j["bpe_model"] = a.bpe_model;
  if (given("--vectorizer")) j["vectorizer"] = a.vectorizer;
  if (given("--embeddings")) j["embeddings"] = a.embeddings;
  if (given("--dim")) j["dim"] = a.dim;
  if (given("--window")) j["window"] = a.window;
  if (given("--negatives")) j["negatives"] = a.negatives;
  if (given("--epochs")) j["epochs"] = a.epochs;
  if (given("--lr")) j["learning_rate"] = a.lr;
  if (given("--min-count")) j["min_count"] = a.min_count;
  if (given("--seed")) j["seed"] = a.seed;
  if (given("--out")) j["out_dir"] = a.out;
  if (given("--experiment")) j["experiment"] = a.experiment;
  if (given("--orphan-quantile")) j["orphan_quantile"] = a.orphan_quantile;
  if (given("--orphan-metric")) j["orphan_metric"] = a.orphan_metric;
  if (given("--cases-k")) j["case_k"] = a.case_k;
  if (given("--threads")) j["threads"] = a.threads;
  out = j.dump();
  return true;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"tracex: information-theoretic analysis of traceability testbeds"};
  app.set_version_flag("--version", std::string(tracex_version()));
  app.require_subcommand(1);
  bool as_json = false;
  app.add_flag("--json", as_json, "machine-readable JSON on stdout")->configurable(false);

  AnalyzeArgs an;
  auto* analyze = app.add_subcommand("analyze", "compute per-pair measures and write the report tree");
  add_run_options(analyze, an);
  analyze->add_option("--vectorizer", an.vectorizer, "skipgram | pvdbow | both | none");
  analyze->add_option("--embeddings", an.embeddings, "load word vectors instead of training");
  analyze->add_option("-o,--out", an.out, "report root directory (default: reports)");
  analyze->add_option("--experiment", an.experiment, "experiment label for table rows");
  analyze->add_option("--orphan-quantile", an.orphan_quantile, "link-population quantile for orphan detection");
  analyze->add_option("--orphan-metric", an.orphan_metric, "mi | si");
  analyze->add_option("--cases-k", an.case_k, "listings per extreme-case kind");
  analyze->add_option("--threads", an.threads, "worker threads (TRACEX_THREADS overrides)");
  analyze->add_flag("--json", as_json, "machine-readable JSON on stdout");

  std::string validate_manifest;
  auto* validate = app.add_subcommand("validate", "load a manifest and check the oracle against the artifacts");
  validate->add_option("manifest", validate_manifest, "testbed manifest")->required();
  validate->add_flag("--json", as_json, "machine-readable JSON on stdout");

  std::string bpe_corpus, bpe_out;
  std::size_t bpe_size = 8000;
  auto* train_bpe = app.add_subcommand("train-bpe", "train a byte-pair-encoding model");
  train_bpe->add_option("--corpus", bpe_corpus, "manifest, directory of text files, or one-document-per-line file")
      ->required();
  train_bpe->add_option("--size", bpe_size, "target vocabulary size (base characters plus merges)");
  train_bpe->add_option("-o,--out", bpe_out, "output model path (JSON)")->required();
  train_bpe->add_flag("--json", as_json, "machine-readable JSON on stdout");

  AnalyzeArgs te;
  std::string emb_out;
  auto* train_emb = app.add_subcommand("train-embeddings", "train skip-gram word vectors on a testbed");
  add_run_options(train_emb, te);
  train_emb->add_option("-o,--out", emb_out, "output embeddings (text format)")->required();
  train_emb->add_flag("--json", as_json, "machine-readable JSON on stdout");

  std::string cases_records, cases_metric = "mi";
  double cases_quantile = 0.99;
  std::size_t cases_k = 10;
  auto* cases = app.add_subcommand("cases", "rebuild case listings from a pairs.csv record stream");
  cases->add_option("records", cases_records, "pairs.csv produced by analyze")->required();
  cases->add_option("--quantile", cases_quantile, "orphan quantile of the link population");
  cases->add_option("--metric", cases_metric, "orphan metric: mi | si");
  cases->add_option("-k", cases_k, "listings per extreme-case kind");
  cases->add_flag("--json", as_json, "JSON array instead of JSON lines");

  unsigned long long synth_seed = 1;
  std::size_t synth_src = 30, synth_tgt = 30;
  double synth_overlap = 0.9;
  std::string synth_out;
  auto* synth = app.add_subcommand("synth", "generate a planted-overlap testbed");
  synth->add_option("--seed", synth_seed, "generator seed");
  synth->add_option("--sources", synth_src, "number of source artifacts");
  synth->add_option("--targets", synth_tgt, "number of target artifacts");
  synth->add_option("--overlap", synth_overlap, "fraction of source vocabulary kept by linked targets");
  synth->add_option("-o,--out", synth_out, "output directory")->required();
  synth->add_flag("--json", as_json, "machine-readable JSON on stdout");

  std::string info_src, info_tgt;
  auto* info = app.add_subcommand("info", "information measures between two text files");
  info->add_option("source", info_src, "source text file")->required();
  info->add_option("target", info_tgt, "target text file")->required();
  info->add_flag("--json", as_json, "machine-readable JSON on stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  if (analyze->parsed()) {
    std::string cfg, err;
    if (!build_config(analyze, an, cfg, err)) {
      std::cerr << "tracex: error: " << err << "\n";
      return 1;
    }
    Owned summary;
    const auto st = tracex_run_analyze(cfg.c_str(), &summary.s);
    if (st != TRACEX_OK) return fail(st);
    const auto j = json::parse(summary.str());
    std::cerr << j["log"].get<std::string>();
    if (as_json) {
      std::cout << summary.str() << "\n";
    } else {
      for (const auto& t : j["testbeds"]) std::cout << "wrote " << t["report_dir"].get<std::string>() << "\n";
    }
    return 0;
  }

  if (validate->parsed()) {
    Owned report;
    const auto st = tracex_validate(validate_manifest.c_str(), &report.s);
    if (st != TRACEX_OK) return fail(st);
    const auto j = json::parse(report.str());
    if (as_json) {
      std::cout << report.str() << "\n";
    } else {
      std::cout << j["name"].get<std::string>() << ": " << j["sources"] << " sources, " << j["targets"]
                << " targets, " << j["counts"]["links"] << " links of " << j["counts"]["all"] << " pairs\n";
      for (const auto& e : j["empty_artifacts"]) std::cout << "empty artifact: " << e.get<std::string>() << "\n";
    }
    if (!j["empty_artifacts"].empty()) {
      std::cerr << "tracex: warning: " << j["empty_artifacts"].size() << " empty artifact(s)\n";
    }
    return 0;
  }

  if (train_bpe->parsed()) {
    Owned summary;
    const auto st = tracex_train_bpe(bpe_corpus.c_str(), bpe_size, bpe_out.c_str(), &summary.s);
    if (st != TRACEX_OK) return fail(st);
    const auto j = json::parse(summary.str());
    if (j["stopped_early"].get<bool>()) {
      std::cerr << "tracex: warning: BPE training stopped at vocabulary " << j["vocab_size"] << " of "
                << j["target_vocab_size"] << " (no adjacent pair occurs twice)\n";
    }
    if (as_json) {
      std::cout << summary.str() << "\n";
    } else {
      std::cout << "wrote " << bpe_out << " (" << j["merges"] << " merges, vocabulary " << j["vocab_size"] << ")\n";
    }
    return 0;
  }

  if (train_emb->parsed()) {
    std::string cfg, err;
    if (!build_config(train_emb, te, cfg, err)) {
      std::cerr << "tracex: error: " << err << "\n";
      return 1;
    }
    Owned summary;
    const auto st = tracex_train_embeddings(cfg.c_str(), emb_out.c_str(), &summary.s);
    if (st != TRACEX_OK) return fail(st);
    const auto j = json::parse(summary.str());
    if (as_json) {
      std::cout << summary.str() << "\n";
    } else {
      std::cout << "wrote " << emb_out << " (" << j["vocab"] << " tokens, dim " << j["dim"] << ")\n";
    }
    return 0;
  }

  if (cases->parsed()) {
    Owned lines;
    const auto st = tracex_cases(cases_records.c_str(), cases_quantile, cases_metric.c_str(), cases_k, &lines.s);
    if (st != TRACEX_OK) return fail(st);
    if (as_json) {
      json arr = json::array();
      std::istringstream in(lines.str());
      std::string line;
      while (std::getline(in, line))
        if (!line.empty()) arr.push_back(json::parse(line));
      std::cout << arr.dump(2) << "\n";
    } else {
      std::cout << lines.str();
    }
    return 0;
  }

  if (synth->parsed()) {
    tracex_testbed* tb = nullptr;
    auto st = tracex_testbed_synthesize(synth_seed, synth_src, synth_tgt, synth_overlap, &tb);
    if (st != TRACEX_OK) return fail(st);
    st = tracex_testbed_save(tb, synth_out.c_str());
    Owned summary;
    if (st == TRACEX_OK) st = tracex_testbed_summary_json(tb, &summary.s);
    tracex_testbed_free(tb);
    if (st != TRACEX_OK) return fail(st);
    if (as_json) {
      auto j = json::parse(summary.str());
      j["manifest"] = synth_out + "/manifest.json";
      std::cout << j.dump(2) << "\n";
    } else {
      std::cout << "wrote " << synth_out << "/manifest.json\n";
    }
    return 0;
  }

  if (info->parsed()) {
    bool ok_a = false, ok_b = false;
    const auto a = read_file(info_src, ok_a);
    const auto b = read_file(info_tgt, ok_b);
    if (!ok_a || !ok_b) {
      std::cerr << "tracex: error: cannot read " << (ok_a ? info_tgt : info_src) << "\n";
      return 2;
    }
    tracex_info r{};
    const auto st = tracex_info_texts(a.c_str(), b.c_str(), &r);
    if (st != TRACEX_OK) return fail(st);
    auto opt = [](int has, double v) { return has ? json(v) : json(nullptr); };
    json j{{"h_x", opt(r.has_h_x, r.h_x)},
           {"h_y", opt(r.has_h_y, r.h_y)},
           {"h_pool", opt(r.has_h_x || r.has_h_y, r.h_pool)},
           {"mi", opt(r.has_pair, r.mi)},
           {"loss", opt(r.has_pair, r.loss)},
           {"noise", opt(r.has_pair, r.noise)},
           {"d1", opt(r.has_pair, r.d1)},
           {"si", r.si},
           {"sx", r.sx},
           {"null_shared", static_cast<bool>(r.null_shared)}};
    if (as_json) {
      std::cout << j.dump(2) << "\n";
    } else {
      for (const auto& [k, v] : j.items()) std::cout << k << " = " << v.dump() << "\n";
    }
    return 0;
  }
  return 1;
}
