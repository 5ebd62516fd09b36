#include "supbench/cli/config.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <functional>
#include <sstream>
#include <vector>

#include "supbench/core/errors.hpp"
#include "supbench/core/tsv.hpp"
#include "supbench/nn/optim.hpp"

namespace supbench::cli {
namespace {

std::string trim(const std::string& s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

std::size_t edit_distance(const std::string& a, const std::string& b) {
  std::vector<std::size_t> row(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) row[j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    std::size_t prev = row[0];
    row[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const std::size_t cur = row[j];
      row[j] = std::min({row[j] + 1, row[j - 1] + 1,
                         prev + (a[i - 1] == b[j - 1] ? 0 : 1)});
      prev = cur;
    }
  }
  return row[b.size()];
}

std::string nearest(const std::string& word,
                    const std::vector<std::string>& candidates) {
  std::string best;
  std::size_t best_d = word.size() + 16;
  for (const auto& c : candidates) {
    const std::size_t d = edit_distance(word, c);
    if (d < best_d) {
      best_d = d;
      best = c;
    }
  }
  return best;
}

[[noreturn]] void unknown_name(const std::string& kind,
                               const std::string& name,
                               const std::vector<std::string>& known) {
  std::string msg = "unknown config " + kind + " '" + name + "'";
  const std::string hint = nearest(name, known);
  if (!hint.empty()) msg += "; did you mean '" + hint + "'?";
  throw ValidationError(msg);
}

int parse_int(const std::string& section, const std::string& key,
              const std::string& value) {
  try {
    std::size_t used = 0;
    const int v = std::stoi(value, &used);
    if (used == value.size()) return v;
  } catch (const std::exception&) {
  }
  throw ValidationError("config key '" + section + "." + key +
                        "' expects an integer, got '" + value + "'");
}

std::uint64_t parse_u64(const std::string& section, const std::string& key,
                        const std::string& value) {
  try {
    std::size_t used = 0;
    const unsigned long long v = std::stoull(value, &used);
    if (used == value.size() && value[0] != '-') return v;
  } catch (const std::exception&) {
  }
  throw ValidationError("config key '" + section + "." + key +
                        "' expects a non-negative integer, got '" + value +
                        "'");
}

double parse_double(const std::string& section, const std::string& key,
                    const std::string& value) {
  try {
    std::size_t used = 0;
    const double v = std::stod(value, &used);
    if (used == value.size()) return v;
  } catch (const std::exception&) {
  }
  throw ValidationError("config key '" + section + "." + key +
                        "' expects a number, got '" + value + "'");
}

using Setter = std::function<void(AppConfig&, const std::string& section,
                                  const std::string& value)>;

struct Key {
  std::string name;
  Setter set;
};

std::vector<Key> method_keys(models::TrainConfig AppConfig::* member) {
  auto cfg = [member](AppConfig& c) -> models::TrainConfig& {
    return c.*member;
  };
  return {
      {"epochs",
       [cfg](AppConfig& c, const std::string& s, const std::string& v) {
         cfg(c).epochs = parse_int(s, "epochs", v);
       }},
      {"batch_size",
       [cfg](AppConfig& c, const std::string& s, const std::string& v) {
         cfg(c).batch_size = parse_int(s, "batch_size", v);
       }},
      {"optimizer",
       [cfg](AppConfig& c, const std::string&, const std::string& v) {
         cfg(c).optimizer = nn::optimizer_from_name(v);
       }},
      {"learning_rate",
       [cfg](AppConfig& c, const std::string& s, const std::string& v) {
         cfg(c).learning_rate = parse_double(s, "learning_rate", v);
       }},
      {"positive_class_weight",
       [cfg](AppConfig& c, const std::string& s, const std::string& v) {
         cfg(c).positive_class_weight =
             parse_double(s, "positive_class_weight", v);
       }},
      {"reconstruction_weight",
       [cfg](AppConfig& c, const std::string& s, const std::string& v) {
         cfg(c).reconstruction_weight =
             parse_double(s, "reconstruction_weight", v);
       }},
      {"latent_dims",
       [cfg](AppConfig& c, const std::string& s, const std::string& v) {
         cfg(c).latent_dims = parse_int(s, "latent_dims", v);
       }},
      {"data_fraction",
       [cfg](AppConfig& c, const std::string& s, const std::string& v) {
         cfg(c).data_fraction = parse_double(s, "data_fraction", v);
       }},
      {"rng_seed",
       [cfg](AppConfig& c, const std::string& s, const std::string& v) {
         cfg(c).rng_seed = parse_u64(s, "rng_seed", v);
       }},
  };
}

std::vector<Key> data_keys() {
  return {
      {"scenes",
       [](AppConfig& c, const std::string& s, const std::string& v) {
         c.data.scenes = parse_int(s, "scenes", v);
       }},
      {"scene_size",
       [](AppConfig& c, const std::string& s, const std::string& v) {
         c.data.scene_size = parse_int(s, "scene_size", v);
       }},
      {"panel_density",
       [](AppConfig& c, const std::string& s, const std::string& v) {
         c.data.panel_density = parse_double(s, "panel_density", v);
       }},
      {"seed",
       [](AppConfig& c, const std::string& s, const std::string& v) {
         c.data.seed = parse_u64(s, "seed", v);
       }},
  };
}

std::vector<Key> run_keys() {
  return {
      {"runs",
       [](AppConfig& c, const std::string& s, const std::string& v) {
         c.run.runs = parse_int(s, "runs", v);
       }},
      {"workers",
       [](AppConfig& c, const std::string& s, const std::string& v) {
         c.run.workers = parse_int(s, "workers", v);
       }},
      {"seed",
       [](AppConfig& c, const std::string& s, const std::string& v) {
         c.run.seed = parse_u64(s, "seed", v);
       }},
      {"search_budget",
       [](AppConfig& c, const std::string& s, const std::string& v) {
         c.run.search_budget = parse_int(s, "search_budget", v);
       }},
  };
}

const std::vector<std::pair<std::string, std::vector<Key>>>& schema() {
  static const std::vector<std::pair<std::string, std::vector<Key>>> s = {
      {"detector", method_keys(&AppConfig::detector)},
      {"classifier", method_keys(&AppConfig::classifier)},
      {"vae", method_keys(&AppConfig::vae)},
      {"data", data_keys()},
      {"run", run_keys()},
  };
  return s;
}

bool train_eq(const models::TrainConfig& a, const models::TrainConfig& b) {
  return a.epochs == b.epochs && a.batch_size == b.batch_size &&
         a.optimizer == b.optimizer && a.learning_rate == b.learning_rate &&
         a.positive_class_weight == b.positive_class_weight &&
         a.reconstruction_weight == b.reconstruction_weight &&
         a.latent_dims == b.latent_dims &&
         a.data_fraction == b.data_fraction && a.rng_seed == b.rng_seed;
}

void append_method(std::ostringstream& out, const std::string& section,
                   const models::TrainConfig& c) {
  out << "[" << section << "]\n";
  out << "epochs = " << c.epochs << "\n";
  out << "batch_size = " << c.batch_size << "\n";
  out << "optimizer = " << nn::optimizer_name(c.optimizer) << "\n";
  out << "learning_rate = " << tsv::format_exact(c.learning_rate) << "\n";
  out << "positive_class_weight = "
      << tsv::format_exact(c.positive_class_weight) << "\n";
  out << "reconstruction_weight = "
      << tsv::format_exact(c.reconstruction_weight) << "\n";
  out << "latent_dims = " << c.latent_dims << "\n";
  out << "data_fraction = " << tsv::format_exact(c.data_fraction) << "\n";
  out << "rng_seed = " << c.rng_seed << "\n";
}

}  // namespace

AppConfig::AppConfig()
    : detector(models::default_train_config(models::Method::Detector)),
      classifier(models::default_train_config(models::Method::Classifier)),
      vae(models::default_train_config(models::Method::Vae)) {}

models::TrainConfig& AppConfig::train_config(models::Method method) {
  switch (method) {
    case models::Method::Detector:
      return detector;
    case models::Method::Classifier:
      return classifier;
    case models::Method::Vae:
      return vae;
  }
  throw ExecutionError("unreachable method");
}

const models::TrainConfig& AppConfig::train_config(
    models::Method method) const {
  return const_cast<AppConfig*>(this)->train_config(method);
}

AppConfig parse_config_text(const std::string& text) {
  AppConfig config;
  const auto& sections = schema();
  const std::vector<Key>* active = nullptr;
  std::string active_name;

  std::istringstream in(text);
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string line = trim(raw.substr(0, raw.find('#')));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') {
        throw ValidationError("config line " + std::to_string(line_no) +
                              ": unterminated section header '" + line + "'");
      }
      active_name = trim(line.substr(1, line.size() - 2));
      active = nullptr;
      for (const auto& [name, keys] : sections) {
        if (name == active_name) active = &keys;
      }
      if (active == nullptr) {
        std::vector<std::string> names;
        for (const auto& [name, keys] : sections) names.push_back(name);
        unknown_name("section", active_name, names);
      }
      continue;
    }
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos) {
      throw ValidationError("config line " + std::to_string(line_no) +
                            ": expected 'key = value', got '" + line + "'");
    }
    if (active == nullptr) {
      throw ValidationError("config line " + std::to_string(line_no) +
                            ": key outside any [section]");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    const Key* match = nullptr;
    for (const auto& k : *active) {
      if (k.name == key) match = &k;
    }
    if (match == nullptr) {
      std::vector<std::string> names;
      for (const auto& k : *active) names.push_back(k.name);
      unknown_name("key", active_name + "." + key, names);
    }
    match->set(config, active_name, value);
  }
  return config;
}

AppConfig parse_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw ValidationError("cannot open config file: " + path.string());
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str());
}

std::string serialize_config(const AppConfig& config) {
  std::ostringstream out;
  append_method(out, "detector", config.detector);
  out << "\n";
  append_method(out, "classifier", config.classifier);
  out << "\n";
  append_method(out, "vae", config.vae);
  out << "\n[data]\n";
  out << "scenes = " << config.data.scenes << "\n";
  out << "scene_size = " << config.data.scene_size << "\n";
  out << "panel_density = " << tsv::format_exact(config.data.panel_density)
      << "\n";
  out << "seed = " << config.data.seed << "\n";
  out << "\n[run]\n";
  out << "runs = " << config.run.runs << "\n";
  out << "workers = " << config.run.workers << "\n";
  out << "seed = " << config.run.seed << "\n";
  out << "search_budget = " << config.run.search_budget << "\n";
  return out.str();
}

bool operator==(const DataConfig& a, const DataConfig& b) {
  return a.scenes == b.scenes && a.scene_size == b.scene_size &&
         a.panel_density == b.panel_density && a.seed == b.seed;
}

bool operator==(const RunConfig& a, const RunConfig& b) {
  return a.runs == b.runs && a.workers == b.workers && a.seed == b.seed &&
         a.search_budget == b.search_budget;
}

bool operator==(const AppConfig& a, const AppConfig& b) {
  return train_eq(a.detector, b.detector) &&
         train_eq(a.classifier, b.classifier) && train_eq(a.vae, b.vae) &&
         a.data == b.data && a.run == b.run;
}

}  // namespace supbench::cli
