#include "vime/run_config.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace vime {

VimeConfig RunConfig::vime_config() const {
    VimeConfig v;
    v.eta = eta;
    v.lambda = lambda;
    if (intrinsic_mode == "approx")
        v.mode = IntrinsicMode::approx;
    else if (intrinsic_mode == "exact")
        v.mode = IntrinsicMode::exact;
    else if (intrinsic_mode == "refit")
        v.mode = IntrinsicMode::refit;
    else
        throw std::invalid_argument("unknown intrinsic_mode: " + intrinsic_mode);
    if (kl_direction == "forward")
        v.direction = KlDirection::forward_kl;
    else if (kl_direction == "reversed")
        v.direction = KlDirection::reversed_kl;
    else
        throw std::invalid_argument("unknown kl_direction: " + kl_direction);
    v.window_length = window_length;
    v.pool_capacity = pool_capacity;
    v.pool_min_size = pool_min_size;
    v.bnn_hidden_units = bnn_hidden;
    v.bnn_iterations = bnn_iterations;
    v.bnn_batch_size = bnn_batch_size;
    v.bnn_learning_rate = bnn_learning_rate;
    v.bnn_samples = bnn_samples;
    v.refit_iterations = refit_iterations;
    v.refit_learning_rate = refit_learning_rate;
    v.prior_sigma = prior_sigma;
    return v;
}

std::vector<std::uint64_t> parse_seed_list(const std::string& csv) {
    std::vector<std::uint64_t> out;
    std::stringstream ss(csv);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        if (tok.empty()) continue;
        out.push_back(std::stoull(tok));
    }
    if (out.empty()) throw std::invalid_argument("empty seed list");
    return out;
}

std::vector<double> parse_double_list(const std::string& csv) {
    std::vector<double> out;
    std::stringstream ss(csv);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        if (tok.empty()) continue;
        out.push_back(std::stod(tok));
    }
    return out;
}

namespace {

bool parse_bool(const std::string& v) {
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw std::invalid_argument("expected boolean, got: " + v);
}

std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    std::size_t b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

}  // namespace

void apply_config_line(RunConfig& cfg, const std::string& key, const std::string& value) {
    if (key == "env") cfg.env = value;
    else if (key == "algorithm") cfg.algorithm = value;
    else if (key == "eta") cfg.eta = std::stod(value);
    else if (key == "seeds") cfg.seeds = parse_seed_list(value);
    else if (key == "n_epochs") cfg.n_epochs = std::stoi(value);
    else if (key == "batch_timesteps") cfg.batch_timesteps = std::stoi(value);
    else if (key == "horizon") cfg.horizon = std::stoi(value);
    else if (key == "gamma") cfg.gamma = std::stod(value);
    else if (key == "policy_hidden") cfg.policy_hidden = std::stoi(value);
    else if (key == "policy_learning_rate") cfg.policy_learning_rate = std::stod(value);
    else if (key == "kl_step") cfg.kl_step = std::stod(value);
    else if (key == "max_policy_log_std") cfg.max_policy_log_std = std::stod(value);
    else if (key == "baseline") cfg.baseline = value;
    else if (key == "eval_episodes") cfg.eval_episodes = std::stoi(value);
    else if (key == "vime_enabled") cfg.vime_enabled = parse_bool(value);
    else if (key == "lambda") cfg.lambda = std::stod(value);
    else if (key == "intrinsic_mode") cfg.intrinsic_mode = value;
    else if (key == "kl_direction") cfg.kl_direction = value;
    else if (key == "window_length") cfg.window_length = std::stoi(value);
    else if (key == "pool_capacity") cfg.pool_capacity = std::stoull(value);
    else if (key == "pool_min_size") cfg.pool_min_size = std::stoull(value);
    else if (key == "bnn_hidden") cfg.bnn_hidden = std::stoi(value);
    else if (key == "bnn_iterations") cfg.bnn_iterations = std::stoi(value);
    else if (key == "bnn_batch_size") cfg.bnn_batch_size = std::stoi(value);
    else if (key == "bnn_learning_rate") cfg.bnn_learning_rate = std::stod(value);
    else if (key == "bnn_samples") cfg.bnn_samples = std::stoi(value);
    else if (key == "refit_iterations") cfg.refit_iterations = std::stoi(value);
    else if (key == "refit_learning_rate") cfg.refit_learning_rate = std::stod(value);
    else if (key == "prior_sigma") cfg.prior_sigma = std::stod(value);
    else if (key == "output_dir") cfg.output_dir = value;
    else if (key == "log_states") cfg.log_states = parse_bool(value);
    else if (key == "threads") cfg.threads = std::stoi(value);
    else throw std::invalid_argument("unknown config key: " + key);
}

RunConfig load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file: " + path);
    RunConfig cfg;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::size_t hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        std::size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw std::runtime_error("bad config line " + std::to_string(lineno) + ": " + line);
        apply_config_line(cfg, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    }
    return cfg;
}

std::string config_to_json(const RunConfig& cfg) {
    nlohmann::ordered_json j;
    j["env"] = cfg.env;
    j["algorithm"] = cfg.algorithm;
    j["eta"] = cfg.eta;
    j["seeds"] = cfg.seeds;
    j["n_epochs"] = cfg.n_epochs;
    j["batch_timesteps"] = cfg.batch_timesteps;
    j["horizon"] = cfg.horizon;
    j["gamma"] = cfg.gamma;
    j["policy_hidden"] = cfg.policy_hidden;
    j["policy_learning_rate"] = cfg.policy_learning_rate;
    j["kl_step"] = cfg.kl_step;
    j["max_policy_log_std"] = cfg.max_policy_log_std;
    j["baseline"] = cfg.baseline;
    j["eval_episodes"] = cfg.eval_episodes;
    j["vime_enabled"] = cfg.vime_enabled;
    j["lambda"] = cfg.lambda;
    j["intrinsic_mode"] = cfg.intrinsic_mode;
    j["kl_direction"] = cfg.kl_direction;
    j["window_length"] = cfg.window_length;
    j["pool_capacity"] = cfg.pool_capacity;
    j["pool_min_size"] = cfg.pool_min_size;
    j["bnn_hidden"] = cfg.bnn_hidden;
    j["bnn_iterations"] = cfg.bnn_iterations;
    j["bnn_batch_size"] = cfg.bnn_batch_size;
    j["bnn_learning_rate"] = cfg.bnn_learning_rate;
    j["bnn_samples"] = cfg.bnn_samples;
    j["refit_iterations"] = cfg.refit_iterations;
    j["refit_learning_rate"] = cfg.refit_learning_rate;
    j["prior_sigma"] = cfg.prior_sigma;
    j["output_dir"] = cfg.output_dir;
    j["log_states"] = cfg.log_states;
    j["threads"] = cfg.threads;
    return j.dump(2) + "\n";
}

}  // namespace vime
