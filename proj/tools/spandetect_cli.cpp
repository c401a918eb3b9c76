/*
 * Copyright (c) 2026, The spandetect Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */


// Command-line front end. Everything goes through the C interface.

#include <unistd.h>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <iterator>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "spandetect/spandetect.h"

namespace {

using nlohmann::json;

constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;

struct Failure {
  int exit_code;
  std::string message;
};

// Owns a string handed out by the library.
class LibString {
 public:
  ~LibString() { sd_string_free(ptr_); }
  char** out() { return &ptr_; }
  std::string str() const { return ptr_ ? std::string(ptr_) : std::string(); }

 private:
  char* ptr_ = nullptr;
};

void check(sd_status st) {
  if (st != SD_OK) throw Failure{kExitRuntime, std::string(sd_status_name(st)) + ": " + sd_last_error()};
}

json read_config(const std::string& path) {
  if (path.empty()) return json::object();
  std::ifstream in(path);
  if (!in) throw Failure{kExitUsage, "cannot open config file " + path};
  try {
    json j = json::parse(in);
    if (!j.is_object()) throw Failure{kExitUsage, "config file must hold a JSON object"};
    return j;
  } catch (const json::parse_error& e) {
    throw Failure{kExitUsage, path + ": " + e.what()};
  }
}

void write_output(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text << '\n';
    return;
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Failure{kExitRuntime, "cannot write " + path};
  out << text << '\n';
}

// Adds `value` under `key` only when the flag was given on the command line.
template <class T>
void set_if(json& j, const CLI::Option* opt, const char* key, const T& value) {
  if (opt->count() > 0) j[key] = value;
}

struct Common {
  std::string config;
  std::string corpus;
  std::string store;
  std::string calibration;
  std::string out;
  std::string report;
  std::string endpoint;
  std::size_t threads = 0;
  std::size_t k = 10;
  std::size_t n_max = 20;
  double target_fpr = 0.01;
  bool literal_init = false;
  bool global_threshold = false;
  bool exact = false;
};

// Pretty console rendering of one evidence document.
void print_evidence(const json& ev, bool color) {
  std::cout << "label: " << ev.at("label").get<std::string>() << "  p_overall: " << ev.at("p_overall").get<double>()
            << "  threshold: " << ev.at("threshold").get<double>() << "  alpha: " << ev.at("alpha").get<double>()
            << "  k: " << ev.at("k").get<std::size_t>() << '\n';
  std::string line;
  for (const auto& s : ev.at("spans")) {
    const std::string c = s.at("color").get<std::string>();
    const std::string text = s.at("text").get<std::string>();
    if (!line.empty()) line += ' ';
    if (color) {
      const char* code = c == "human_red" ? "\x1b[31m" : c == "llm_blue" ? "\x1b[34m" : "\x1b[32m";
      line += code + text + "\x1b[0m";
    } else {
      const char tag = c == "human_red" ? 'H' : c == "llm_blue" ? 'L' : 'N';
      line += std::string("[") + tag + ": " + text + "]";
    }
  }
  std::cout << line << '\n';
  for (const auto& s : ev.at("spans")) {
    std::cout << "  [" << s.at("start").get<std::size_t>() << "+" << s.at("len").get<std::size_t>() << "] p="
              << s.at("p").get<double>() << " r=" << s.at("r").get<double>() << "  " << s.at("text").get<std::string>();
    if (s.at("no_evidence").get<bool>()) std::cout << "  (no evidence)";
    std::cout << '\n';
  }
}

void on_ready(int port, void*) {
  std::cerr << "listening on port " << port << std::endl;
}

int run(int argc, char** argv) {
  CLI::App app{"span-level detection of machine-generated text"};
  app.require_subcommand(1);
  Common c;

  auto add_threads = [&](CLI::App* s) { return s->add_option("--threads", c.threads, "worker threads (0: all cores)"); };
  auto add_config = [&](CLI::App* s) { s->add_option("--config", c.config, "JSON file with options")->check(CLI::ExistingFile); };

  // synth
  auto* synth = app.add_subcommand("synth", "write a seeded synthetic corpus");
  std::uint64_t seed = 0;
  std::size_t train = 200, validation = 50, test = 50;
  synth->add_option("--out", c.out, "output JSONL path")->required();
  auto* o_seed = synth->add_option("--seed", seed);
  auto* o_train = synth->add_option("--train", train, "pairs in the train split");
  auto* o_val = synth->add_option("--validation", validation, "pairs in the validation split");
  auto* o_test = synth->add_option("--test", test, "pairs in the test split");
  add_config(synth);

  // build
  auto* build = app.add_subcommand("build", "build a span store from the train split");
  build->add_option("--corpus", c.corpus)->required();
  build->add_option("--out", c.out, "store directory")->required();
  auto* b_nmax = build->add_option("--n-max", c.n_max, "longest span length");
  auto* b_k = build->add_option("--k", c.k, "default neighbour count");
  bool approx = false;
  auto* b_approx = build->add_flag("--approx", approx, "also build graph indexes for approximate search");
  auto* b_endpoint = build->add_option("--endpoint", c.endpoint, "remote embedding service URL");
  auto* b_threads = add_threads(build);
  add_config(build);

  // calibrate / evaluate / sweep-alpha share the pipeline flags
  auto pipeline_flags = [&](CLI::App* s, bool with_k) {
    std::vector<CLI::Option*> v;
    v.push_back(with_k ? s->add_option("--k", c.k, "neighbours per span") : nullptr);
    v.push_back(with_k ? s->add_option("--n-max", c.n_max, "longest span length") : nullptr);
    v.push_back(with_k ? s->add_option("--target-fpr", c.target_fpr, "validation false positive target") : nullptr);
    v.push_back(add_threads(s));
    v.push_back(s->add_flag("--literal-init", c.literal_init, "seed DP cells with a zero score"));
    v.push_back(s->add_flag("--global-threshold", c.global_threshold, "one threshold for every cell"));
    v.push_back(s->add_flag("--exact", c.exact, "force exact neighbour search"));
    v.push_back(s->add_option("--endpoint", c.endpoint, "remote embedding service URL"));
    add_config(s);
    return v;
  };
  auto pipeline_json = [&](const std::vector<CLI::Option*>& v) {
    json j = read_config(c.config);
    if (v[0]) set_if(j, v[0], "k", c.k);
    if (v[1]) set_if(j, v[1], "n_max", c.n_max);
    if (v[2]) set_if(j, v[2], "target_fpr", c.target_fpr);
    set_if(j, v[3], "threads", c.threads);
    if (c.literal_init) j["literal_init"] = true;
    if (c.global_threshold) j["per_domain"] = false;
    if (c.exact) j["exact"] = true;
    set_if(j, v[7], "endpoint", c.endpoint);
    return j;
  };

  auto* calib = app.add_subcommand("calibrate", "fit normalization, alpha and threshold on validation");
  calib->add_option("--store", c.store)->required();
  calib->add_option("--corpus", c.corpus)->required();
  calib->add_option("--out", c.out, "calibration file")->required();
  auto calib_flags = pipeline_flags(calib, true);

  auto* evalc = app.add_subcommand("evaluate", "test-split metrics at the calibrated operating point");
  evalc->add_option("--store", c.store)->required();
  evalc->add_option("--calibration", c.calibration)->required();
  evalc->add_option("--corpus", c.corpus)->required();
  evalc->add_option("--report", c.report, "report path (default: stdout)");
  auto eval_flags = pipeline_flags(evalc, false);

  auto* sweepa = app.add_subcommand("sweep-alpha", "test metrics at every grid alpha");
  sweepa->add_option("--store", c.store)->required();
  sweepa->add_option("--calibration", c.calibration)->required();
  sweepa->add_option("--corpus", c.corpus)->required();
  sweepa->add_option("--report", c.report, "report path (default: stdout)");
  auto sweepa_flags = pipeline_flags(sweepa, false);

  auto* sweeps = app.add_subcommand("sweep-size", "rebuild on nested train subsamples and re-evaluate");
  sweeps->add_option("--corpus", c.corpus)->required();
  std::vector<std::size_t> sizes;
  sweeps->add_option("--sizes", sizes, "pairs per sample, e.g. 25,50,100")->delimiter(',')->required();
  auto* s_seed = sweeps->add_option("--seed", seed);
  sweeps->add_option("--report", c.report, "report path (default: stdout)");
  auto* s_nmax = sweeps->add_option("--n-max", c.n_max, "longest span length");
  auto sweeps_flags = pipeline_flags(sweeps, false);

  // detect
  auto* detect = app.add_subcommand("detect", "classify one text (argument or stdin)");
  std::string text;
  bool as_json = false;
  std::string color_mode = "auto";
  double alpha = 0.5, epsilon = 0.5;
  detect->add_option("--store", c.store)->required();
  detect->add_option("--calibration", c.calibration)->required();
  detect->add_option("--text", text, "text to classify (default: read stdin)");
  detect->add_flag("--json", as_json, "print evidence JSON");
  detect->add_option("--color", color_mode)->check(CLI::IsMember({"auto", "always", "never"}));
  auto* d_alpha = detect->add_option("--alpha", alpha)->check(CLI::Range(0.0, 1.0));
  auto* d_k = detect->add_option("--k", c.k)->check(CLI::PositiveNumber);
  auto* d_eps = detect->add_option("--epsilon", epsilon);
  auto* d_endpoint = detect->add_option("--endpoint", c.endpoint, "remote embedding service URL");

  // serve
  auto* serve = app.add_subcommand("serve", "HTTP service: POST /api/detect, GET /api/health");
  std::string host = "127.0.0.1", static_dir;
  int port = 8080;
  std::size_t max_chars = 20000;
  bool cors = false;
  serve->add_option("--store", c.store)->required();
  serve->add_option("--calibration", c.calibration)->required();
  serve->add_option("--host", host);
  serve->add_option("--port", port)->check(CLI::Range(0, 65535));
  serve->add_option("--max-chars", max_chars, "longest accepted text, in characters");
  serve->add_flag("--cors", cors, "allow cross-origin requests");
  serve->add_option("--static-dir", static_dir, "directory served at /")->check(CLI::ExistingDirectory);
  auto* v_endpoint = serve->add_option("--endpoint", c.endpoint, "remote embedding service URL");

  auto* info = app.add_subcommand("info", "summarize a corpus or a store");
  info->add_option("--store", c.store);
  info->add_option("--corpus", c.corpus);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  if (synth->parsed()) {
    json o = read_config(c.config);
    set_if(o, o_seed, "seed", seed);
    set_if(o, o_train, "train", train);
    set_if(o, o_val, "validation", validation);
    set_if(o, o_test, "test", test);
    check(sd_synthesize_corpus(o.dump().c_str(), c.out.c_str()));
    LibString summary;
    check(sd_corpus_summary(c.out.c_str(), summary.out()));
    std::cout << summary.str() << '\n';
  } else if (build->parsed()) {
    json o = read_config(c.config);
    set_if(o, b_nmax, "n_max", c.n_max);
    set_if(o, b_k, "k", c.k);
    set_if(o, b_threads, "threads", c.threads);
    if (approx) o["approximate"]["enabled"] = true;
    (void)b_approx;
    if (b_endpoint->count() > 0) {
      o["embedder"]["kind"] = "remote";
      o["embedder"]["endpoint"] = c.endpoint;
    }
    LibString fp;
    check(sd_build_store(c.corpus.c_str(), c.out.c_str(), o.dump().c_str(), fp.out()));
    LibString summary;
    check(sd_store_info(c.out.c_str(), summary.out()));
    std::cout << summary.str() << '\n';
  } else if (calib->parsed()) {
    LibString cal;
    check(sd_calibrate(c.store.c_str(), c.corpus.c_str(), c.out.c_str(), pipeline_json(calib_flags).dump().c_str(),
                       cal.out()));
    const json j = json::parse(cal.str());
    std::cout << "alpha " << j.at("alpha").get<double>() << "  epsilon " << j.at("epsilon").get<double>()
              << "  validation accuracy " << j.at("validation").at("accuracy").get<double>() << "  auroc "
              << j.at("validation").at("auroc").get<double>() << '\n';
  } else if (evalc->parsed() || sweepa->parsed()) {
    LibString rep;
    const auto& flags = evalc->parsed() ? eval_flags : sweepa_flags;
    const auto fn = evalc->parsed() ? sd_evaluate : sd_sweep_alpha;
    check(fn(c.store.c_str(), c.calibration.c_str(), c.corpus.c_str(), pipeline_json(flags).dump().c_str(),
             rep.out()));
    write_output(c.report, rep.str());
  } else if (sweeps->parsed()) {
    json p = pipeline_json(sweeps_flags);
    json o;
    o["sizes"] = sizes;
    o["seed"] = seed;
    (void)s_seed;
    o["build"] = p.value("build", json::object());
    p.erase("build");
    set_if(o["build"], s_nmax, "n_max", c.n_max);
    if (p.contains("threads")) o["build"]["threads"] = p["threads"];
    o["pipeline"] = p;
    LibString rep;
    check(sd_sweep_size(c.corpus.c_str(), o.dump().c_str(), rep.out()));
    write_output(c.report, rep.str());
  } else if (detect->parsed()) {
    if (detect->count("--text") == 0) {
      text.assign(std::istreambuf_iterator<char>(std::cin), {});
    }
    if (text.find_first_not_of(" \t\r\n\f\v") == std::string::npos) {
      throw Failure{kExitUsage, "no input text (pass --text or pipe text on stdin)"};
    }
    json eo = json::object();
    set_if(eo, d_endpoint, "endpoint", c.endpoint);
    sd_engine* engine = nullptr;
    check(sd_engine_open(c.store.c_str(), c.calibration.c_str(), eo.dump().c_str(), &engine));
    std::unique_ptr<sd_engine, void (*)(sd_engine*)> guard(engine, sd_engine_close);
    json ov = json::object();
    set_if(ov, d_alpha, "alpha", alpha);
    set_if(ov, d_k, "k", c.k);
    set_if(ov, d_eps, "epsilon", epsilon);
    LibString ev;
    check(sd_engine_detect(engine, text.c_str(), ov.dump().c_str(), ev.out()));
    if (as_json) {
      std::cout << ev.str() << '\n';
    } else {
      const bool color = color_mode == "always" || (color_mode == "auto" && isatty(STDOUT_FILENO) != 0 &&
                                                    std::getenv("NO_COLOR") == nullptr);
      print_evidence(json::parse(ev.str()), color);
    }
  } else if (serve->parsed()) {
    json eo = json::object();
    set_if(eo, v_endpoint, "endpoint", c.endpoint);
    sd_engine* engine = nullptr;
    check(sd_engine_open(c.store.c_str(), c.calibration.c_str(), eo.dump().c_str(), &engine));
    std::unique_ptr<sd_engine, void (*)(sd_engine*)> guard(engine, sd_engine_close);
    json so{{"host", host}, {"port", port}, {"max_text_chars", max_chars}, {"cors", cors}};
    if (!static_dir.empty()) so["static_dir"] = static_dir;
    check(sd_serve(engine, so.dump().c_str(), on_ready, nullptr));
  } else if (info->parsed()) {
    if (c.store.empty() == c.corpus.empty()) throw Failure{kExitUsage, "pass exactly one of --store, --corpus"};
    LibString out;
    check(c.store.empty() ? sd_corpus_summary(c.corpus.c_str(), out.out()) : sd_store_info(c.store.c_str(), out.out()));
    std::cout << out.str() << '\n';
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const Failure& f) {
    std::cerr << "spandetect: " << f.message << '\n';
    return f.exit_code;
  } catch (const std::exception& e) {
    std::cerr << "spandetect: " << e.what() << '\n';
    return kExitRuntime;
  }
}
