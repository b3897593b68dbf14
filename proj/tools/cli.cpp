#include "cli.hpp"

#include <chrono>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <ostream>
#include <sstream>
#include <thread>

#include <sys/utsname.h>

#include <CLI11.hpp>
#include <json.hpp>

#include "indexrag/corpus_io.hpp"
#include "indexrag/errors.hpp"
#include "indexrag/eval_harness.hpp"
#include "indexrag/knowledge_index.hpp"
#include "indexrag/mock_gateway.hpp"
#include "indexrag/openai_gateway.hpp"

namespace indexrag::cli {

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

namespace {

constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;

template <class T>
T take(const json& j, const std::string& key) {
  try {
    return j.get<T>();
  } catch (const json::exception&) {
    throw InputError("config key '" + key + "' has the wrong type");
  }
}

// Raw flag values; only options the user actually passed are applied.
struct Flags {
  std::string config_path;
  std::string corpus, index_dir, dataset, out_dir, mock_script, stage1, mode, doc_path, question;
  int tau = 0, max_source_docs = 0, max_facts_per_doc = 0, chunk_words = 0, chunk_overlap = 0;
  int k = 0, n_candidates = 0, ircot_steps = 0, ircot_per_step = 0, parallelism = 0;
  std::vector<int> kb;
  bool json_output = false;
  bool exclude_failures = false;
};

using Appliers = std::vector<std::pair<CLI::Option*, std::function<void(RunConfig&)>>>;

void require_file(const std::string& path, const char* what) {
  if (path.empty()) throw InputError(std::string("missing ") + what + " path");
  if (!fs::is_regular_file(path)) throw PersistenceError(std::string(what) + " not readable: " + path);
}

void require_index(const std::string& dir) {
  if (dir.empty()) throw InputError("missing --index path");
  if (!fs::is_regular_file(KnowledgeIndex::knowledge_path(dir))) {
    throw PersistenceError("no index found at " + dir);
  }
}

void print_stats(std::ostream& out, const IndexStats& s) {
  out << "documents: " << s.document_count << '\n'
      << "aku entries: " << s.aku_count << '\n'
      << "bridge entities: " << s.bridge_entity_count << '\n'
      << "bridging facts: " << s.bridging_fact_count << '\n'
      << "non-empty rate: " << s.non_empty_rate << '\n';
}

void print_list(std::ostream& out, const char* label, const std::vector<std::string>& items) {
  out << label << ":";
  if (items.empty()) out << " (none)";
  for (std::size_t i = 0; i < items.size(); ++i) out << (i ? ", " : " ") << items[i];
  out << '\n';
}

ordered_json query_result_json(const std::string& question, const QueryConfig& cfg, const QueryResult& r) {
  ordered_json context = ordered_json::array();
  for (std::size_t i = 0; i < r.selected_context.size(); ++i) {
    const auto& e = r.selected_context[i].entry;
    ordered_json item = {{"rank", i + 1},
                         {"entry_id", e.entry_id},
                         {"kind", to_string(e.kind)},
                         {"score", r.selected_context[i].score},
                         {"text", e.text},
                         {"provenance", e.provenance}};
    if (e.entity) item["entity"] = *e.entity;
    context.push_back(item);
  }
  ordered_json steps = ordered_json::array();
  for (const auto& s : r.steps_trace) steps.push_back({{"reasoning", s.reasoning}, {"search", s.search_query}});
  return {{"question", question},
          {"mode", to_string(cfg.mode)},
          {"answer", r.answer},
          {"llm_calls", r.llm_calls},
          {"retrieval_latency_s", std::chrono::duration<double>(r.retrieval_latency).count()},
          {"context", context},
          {"steps", steps}};
}

std::map<std::string, std::string> run_metadata(const RunConfig& cfg, const ModelGateway& gateway) {
  std::map<std::string, std::string> meta;
  auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  char stamp[64];
  std::strftime(stamp, sizeof stamp, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
  meta["timestamp"] = stamp;
  utsname u{};
  if (uname(&u) == 0) meta["hardware"] = std::string(u.sysname) + " " + u.release + " " + u.machine;
  meta["hardware_threads"] = std::to_string(std::thread::hardware_concurrency());
  meta["gateway"] = gateway.describe();
  meta["index"] = cfg.index_dir;
  meta["dataset"] = cfg.dataset;
  return meta;
}

int cmd_index(const RunConfig& cfg, std::ostream& out) {
  require_file(cfg.corpus, "corpus");
  if (cfg.index_dir.empty()) throw InputError("missing --index path");
  auto corpus = read_corpus(cfg.corpus);
  auto gateway = make_gateway(cfg);
  auto options = cfg.indexer;
  options.parallelism = cfg.parallelism;
  auto index = build_index(corpus, cfg.index, *gateway, options);
  index.save(cfg.index_dir);
  out << "index written to " << cfg.index_dir << '\n';
  print_stats(out, index.stats());
  return 0;
}

int cmd_add(const RunConfig& cfg, const std::string& doc_path, std::ostream& out) {
  require_index(cfg.index_dir);
  require_file(doc_path, "document");
  auto docs = read_corpus(doc_path);
  auto index = KnowledgeIndex::load(cfg.index_dir);
  auto gateway = make_gateway(cfg);
  auto options = cfg.indexer;
  options.parallelism = cfg.parallelism;
  for (const auto& doc : docs) {
    auto report = add_document(index, doc, *gateway, options);
    out << "added " << doc.doc_id << '\n';
    print_list(out, "newly bridged", report.newly_bridged);
    print_list(out, "rebridged", report.rebridged);
    print_list(out, "dropped", report.dropped);
  }
  index.save(cfg.index_dir);
  print_stats(out, index.stats());
  return 0;
}

int cmd_query(const RunConfig& cfg, const std::string& question, bool json_output, std::ostream& out) {
  require_index(cfg.index_dir);
  if (question.empty()) throw InputError("missing question");
  auto store = VectorStore::load(KnowledgeIndex::store_path(cfg.index_dir));
  auto gateway = make_gateway(cfg);
  QueryEngine engine(store, *gateway, cfg.query);
  auto result = engine.answer(question);
  if (json_output) {
    out << query_result_json(question, cfg.query, result).dump(2) << '\n';
    return 0;
  }
  out << "answer: " << result.answer << '\n';
  out << "context:\n";
  for (std::size_t i = 0; i < result.selected_context.size(); ++i) {
    const auto& e = result.selected_context[i].entry;
    out << "  [" << i + 1 << "] (" << to_string(e.kind) << ") " << e.text << '\n';
  }
  for (std::size_t i = 0; i < result.steps_trace.size(); ++i) {
    out << "step " << i + 1 << ": " << result.steps_trace[i].reasoning << " | search: " << result.steps_trace[i].search_query
        << '\n';
  }
  out << "llm_calls: " << result.llm_calls << '\n';
  out << "retrieval_latency_s: " << std::chrono::duration<double>(result.retrieval_latency).count() << '\n';
  return 0;
}

int cmd_eval(const RunConfig& cfg, std::ostream& out) {
  require_index(cfg.index_dir);
  require_file(cfg.dataset, "dataset");
  auto dataset = read_dataset(cfg.dataset);
  auto store = VectorStore::load(KnowledgeIndex::store_path(cfg.index_dir));
  auto gateway = make_gateway(cfg);

  std::vector<int> sweep = cfg.kb_sweep.empty() ? std::vector<int>{cfg.query.k_b} : cfg.kb_sweep;
  EvalOptions options;
  options.parallelism = cfg.parallelism;
  options.exclude_failures = cfg.exclude_failures;
  for (int kb : sweep) {
    QueryConfig qc = cfg.query;
    qc.k_b = kb;
    QueryEngine engine(store, *gateway, qc);
    auto report = run_eval(dataset, engine, options);
    fs::path dir = sweep.size() > 1 ? fs::path(cfg.out_dir) / ("kb_" + std::to_string(kb)) : fs::path(cfg.out_dir);
    write_report(report, dir, run_metadata(cfg, *gateway));
    out << "k_b = " << kb << " (" << dir.string() << ")\n" << format_report_table(report);
  }
  return 0;
}

int cmd_inspect(const RunConfig& cfg, std::ostream& out) {
  require_index(cfg.index_dir);
  auto index = KnowledgeIndex::load(cfg.index_dir);
  out << "store entries: " << index.store.size() << '\n'
      << "  aku: " << index.store.count(EntryKind::kAku) << '\n'
      << "  bridging: " << index.store.count(EntryKind::kBridging) << '\n'
      << "dimension: " << index.store.dimension() << '\n'
      << "stage1 strategy: " << to_string(index.config.stage1_strategy) << '\n'
      << "tau: " << index.config.tau << '\n';
  print_stats(out, index.stats());
  return 0;
}

}  // namespace

void apply_config_file(RunConfig& cfg, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw PersistenceError("cannot open config file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  json j = json::parse(ss.str(), nullptr, false);
  if (j.is_discarded() || !j.is_object()) throw InputError("config file " + path + " is not a JSON object");

  static const std::map<std::string, std::function<void(RunConfig&, const json&, const std::string&)>> setters = {
      {"corpus", [](RunConfig& c, const json& v, const std::string& k) { c.corpus = take<std::string>(v, k); }},
      {"index", [](RunConfig& c, const json& v, const std::string& k) { c.index_dir = take<std::string>(v, k); }},
      {"dataset", [](RunConfig& c, const json& v, const std::string& k) { c.dataset = take<std::string>(v, k); }},
      {"out", [](RunConfig& c, const json& v, const std::string& k) { c.out_dir = take<std::string>(v, k); }},
      {"mock_script", [](RunConfig& c, const json& v, const std::string& k) { c.mock_script = take<std::string>(v, k); }},
      {"endpoint", [](RunConfig& c, const json& v, const std::string& k) { c.endpoint = take<std::string>(v, k); }},
      {"chat_model", [](RunConfig& c, const json& v, const std::string& k) { c.chat_model = take<std::string>(v, k); }},
      {"embedding_model",
       [](RunConfig& c, const json& v, const std::string& k) { c.embedding_model = take<std::string>(v, k); }},
      {"parallelism", [](RunConfig& c, const json& v, const std::string& k) { c.parallelism = take<int>(v, k); }},
      {"tau", [](RunConfig& c, const json& v, const std::string& k) { c.index.tau = take<int>(v, k); }},
      {"max_source_docs",
       [](RunConfig& c, const json& v, const std::string& k) { c.index.max_source_docs = take<int>(v, k); }},
      {"max_facts_per_doc",
       [](RunConfig& c, const json& v, const std::string& k) { c.index.max_facts_per_doc = take<int>(v, k); }},
      {"stage1",
       [](RunConfig& c, const json& v, const std::string& k) {
         c.index.stage1_strategy = stage1_strategy_from_string(take<std::string>(v, k));
       }},
      {"chunk_target_words",
       [](RunConfig& c, const json& v, const std::string& k) { c.index.chunk_target_words = take<int>(v, k); }},
      {"chunk_overlap_chars",
       [](RunConfig& c, const json& v, const std::string& k) { c.index.chunk_overlap_chars = take<int>(v, k); }},
      {"max_document_chars",
       [](RunConfig& c, const json& v, const std::string& k) {
         c.indexer.max_document_chars = take<std::size_t>(v, k);
       }},
      {"indexing_max_tokens",
       [](RunConfig& c, const json& v, const std::string& k) { c.indexer.indexing_max_tokens = take<int>(v, k); }},
      {"n_candidates", [](RunConfig& c, const json& v, const std::string& k) { c.query.n_candidates = take<int>(v, k); }},
      {"k", [](RunConfig& c, const json& v, const std::string& k) { c.query.k = take<int>(v, k); }},
      {"kb",
       [](RunConfig& c, const json& v, const std::string& k) {
         if (v.is_array()) {
           c.kb_sweep = take<std::vector<int>>(v, k);
         } else {
           c.query.k_b = take<int>(v, k);
         }
       }},
      {"mode",
       [](RunConfig& c, const json& v, const std::string& k) { c.query.mode = query_mode_from_string(take<std::string>(v, k)); }},
      {"ircot_steps", [](RunConfig& c, const json& v, const std::string& k) { c.query.ircot_steps = take<int>(v, k); }},
      {"ircot_per_step",
       [](RunConfig& c, const json& v, const std::string& k) { c.query.ircot_per_step = take<int>(v, k); }},
      {"exclude_failures",
       [](RunConfig& c, const json& v, const std::string& k) { c.exclude_failures = take<bool>(v, k); }},
  };
  for (const auto& [key, value] : j.items()) {
    if (key == "api_key") throw InputError("credentials must come from the environment, not the config file");
    auto it = setters.find(key);
    if (it == setters.end()) throw InputError("unknown config key '" + key + "'");
    it->second(cfg, value, key);
  }
}

std::unique_ptr<ModelGateway> make_gateway(const RunConfig& cfg) {
  if (!cfg.mock_script.empty()) {
    return std::make_unique<MockGateway>(MockScript::load(cfg.mock_script));
  }
  OpenAiConfig oc;
  if (!cfg.endpoint.empty()) oc.base_url = cfg.endpoint;
  oc.chat_model = cfg.chat_model;
  oc.embedding_model = cfg.embedding_model;
  oc = OpenAiConfig::from_environment(oc);
  if (oc.api_key.empty()) {
    throw InputError("no model configured: pass --mock-script or set INDEXRAG_API_KEY (or OPENAI_API_KEY)");
  }
  return std::make_unique<OpenAiGateway>(oc);
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"IndexRAG: bridging-fact indexing and single-pass retrieval for multi-hop QA", "indexrag"};
  app.require_subcommand(1);
  app.fallthrough();

  Flags f;
  Appliers appliers;
  auto bind = [&](CLI::Option* opt, std::function<void(RunConfig&)> apply) { appliers.emplace_back(opt, std::move(apply)); };

  app.add_option("--config", f.config_path, "JSON config file (flags override it)");
  bind(app.add_option("--mock-script", f.mock_script, "Scripted mock model (JSON)"),
       [&](RunConfig& c) { c.mock_script = f.mock_script; });
  bind(app.add_option("--parallelism", f.parallelism, "Concurrent model calls"),
       [&](RunConfig& c) { c.parallelism = f.parallelism; });

  auto add_index_flag = [&](CLI::App* sub) {
    bind(sub->add_option("--index", f.index_dir, "Index directory"), [&](RunConfig& c) { c.index_dir = f.index_dir; });
  };
  auto add_query_flags = [&](CLI::App* sub) {
    bind(sub->add_option("--k", f.k, "Context size"), [&](RunConfig& c) { c.query.k = f.k; });
    bind(sub->add_option("--n-candidates", f.n_candidates, "Retrieved candidates"),
         [&](RunConfig& c) { c.query.n_candidates = f.n_candidates; });
    bind(sub->add_option("--mode", f.mode, "single_pass or ircot"),
         [&](RunConfig& c) { c.query.mode = query_mode_from_string(f.mode); });
    bind(sub->add_option("--ircot-steps", f.ircot_steps, "Reasoning steps in ircot mode"),
         [&](RunConfig& c) { c.query.ircot_steps = f.ircot_steps; });
    bind(sub->add_option("--ircot-per-step", f.ircot_per_step, "Hits retrieved per reasoning step"),
         [&](RunConfig& c) { c.query.ircot_per_step = f.ircot_per_step; });
  };

  auto* index_cmd = app.add_subcommand("index", "Build an index from a corpus");
  bind(index_cmd->add_option("--corpus", f.corpus, "Corpus (JSON lines)"), [&](RunConfig& c) { c.corpus = f.corpus; });
  add_index_flag(index_cmd);
  bind(index_cmd->add_option("--stage1", f.stage1, "qa_extraction, summary or chunking"),
       [&](RunConfig& c) { c.index.stage1_strategy = stage1_strategy_from_string(f.stage1); });
  bind(index_cmd->add_option("--tau", f.tau, "Upper document-frequency bound for bridge entities"),
       [&](RunConfig& c) { c.index.tau = f.tau; });
  bind(index_cmd->add_option("--max-source-docs", f.max_source_docs, "Documents per bridging prompt"),
       [&](RunConfig& c) { c.index.max_source_docs = f.max_source_docs; });
  bind(index_cmd->add_option("--max-facts-per-doc", f.max_facts_per_doc, "Facts per document in a bridging prompt"),
       [&](RunConfig& c) { c.index.max_facts_per_doc = f.max_facts_per_doc; });
  bind(index_cmd->add_option("--chunk-words", f.chunk_words, "Words per chunk (chunking strategy)"),
       [&](RunConfig& c) { c.index.chunk_target_words = f.chunk_words; });
  bind(index_cmd->add_option("--chunk-overlap", f.chunk_overlap, "Overlap characters (chunking strategy)"),
       [&](RunConfig& c) { c.index.chunk_overlap_chars = f.chunk_overlap; });

  auto* add_cmd = app.add_subcommand("add", "Add documents to an existing index");
  add_index_flag(add_cmd);
  add_cmd->add_option("--doc", f.doc_path, "Documents to add (corpus format)")->required();

  auto* query_cmd = app.add_subcommand("query", "Answer one question");
  add_index_flag(query_cmd);
  add_query_flags(query_cmd);
  bind(query_cmd->add_option("--kb", f.kb, "Bridging facts allowed in the context")->expected(1),
       [&](RunConfig& c) { c.query.k_b = f.kb.front(); });
  query_cmd->add_option("question", f.question, "Question text")->required();
  query_cmd->add_flag("--json", f.json_output, "Print the result as JSON");

  auto* eval_cmd = app.add_subcommand("eval", "Evaluate a dataset");
  add_index_flag(eval_cmd);
  add_query_flags(eval_cmd);
  bind(eval_cmd->add_option("--dataset", f.dataset, "Dataset (JSON lines)"), [&](RunConfig& c) { c.dataset = f.dataset; });
  bind(eval_cmd->add_option("--out", f.out_dir, "Report directory"), [&](RunConfig& c) { c.out_dir = f.out_dir; });
  bind(eval_cmd->add_option("--kb", f.kb, "k_b value(s); several values run a sweep")->expected(1, -1),
       [&](RunConfig& c) {
         if (f.kb.size() == 1) {
           c.query.k_b = f.kb.front();
           c.kb_sweep.clear();
         } else {
           c.kb_sweep = f.kb;
         }
       });
  bind(eval_cmd->add_flag("--exclude-failures", f.exclude_failures, "Leave failed questions out of the means"),
       [&](RunConfig& c) { c.exclude_failures = f.exclude_failures; });

  auto* inspect_cmd = app.add_subcommand("inspect", "Print index statistics");
  add_index_flag(inspect_cmd);

  std::vector<const char*> argv{"indexrag"};
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err);
  }

  RunConfig cfg;
  try {
    if (!f.config_path.empty()) apply_config_file(cfg, f.config_path);
    for (auto& [opt, apply] : appliers) {
      if (opt->count() > 0) apply(cfg);
    }
    cfg.index.validate();
    cfg.query.validate();
    if (!cfg.mock_script.empty()) require_file(cfg.mock_script, "mock script");
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }

  try {
    if (*index_cmd) return cmd_index(cfg, out);
    if (*add_cmd) return cmd_add(cfg, f.doc_path, out);
    if (*query_cmd) return cmd_query(cfg, f.question, f.json_output, out);
    if (*eval_cmd) return cmd_eval(cfg, out);
    if (*inspect_cmd) return cmd_inspect(cfg, out);
  } catch (const InputError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitUsage;
}

}  // namespace indexrag::cli
