#include "ciqa/run_config.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "ciqa/errors.hpp"

namespace ciqa {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

std::vector<double> parse_double_list(const std::string& s, const std::string& where) {
    std::vector<double> out;
    for (const auto& item : split_list(s)) {
        char* end = nullptr;
        const double v = std::strtod(item.c_str(), &end);
        if (end == item.c_str() || *end != '\0')
            throw SchemaError(where + ": bad number '" + item + "'");
        out.push_back(v);
    }
    if (out.empty()) throw SchemaError(where + ": empty list");
    return out;
}

}  // namespace

void RunConfig::validate() const {
    if (rounds < 1 || rounds > repeats * folds)
        throw SchemaError("rounds must lie in [1, repeats*folds]");
    if (repeats < 1 || folds < 2) throw SchemaError("need repeats >= 1 and folds >= 2");
    if (workers < 0) throw SchemaError("workers must be >= 0");
    grid.validate();
    if (classes.size() < 2) throw SchemaError("need at least two distortion classes");
    for (const auto& c : classes) {
        const auto& known = data::distortion_classes();
        if (std::find(known.begin(), known.end(), c) == known.end())
            throw SchemaError("unknown distortion class '" + c + "'");
    }
}

void apply_config_file(RunConfig& cfg, const std::string& path) {
    std::ifstream is(path);
    if (!is) throw MissingFile("cannot open config " + path);
    std::string line;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const std::string where = path + ":" + std::to_string(lineno);
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw SchemaError(where + ": expected key=value");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (value.empty()) throw SchemaError(where + ": empty value for " + key);

        try {
            if (key == "seed") cfg.seed = std::stoull(value);
            else if (key == "rounds") cfg.rounds = std::stoi(value);
            else if (key == "repeats") cfg.repeats = std::stoi(value);
            else if (key == "folds") cfg.folds = std::stoi(value);
            else if (key == "workers") cfg.workers = std::stoi(value);
            else if (key == "block_policy") cfg.block_policy = parse_block_policy(value);
            else if (key == "c_grid") cfg.grid.c_grid = parse_double_list(value, where);
            else if (key == "gamma_grid") cfg.grid.gamma_grid = parse_double_list(value, where);
            else if (key == "nu") cfg.grid.nu = std::stod(value);
            else if (key == "cv_folds") cfg.grid.cv_folds = std::stoi(value);
            else if (key == "cv_repeats") cfg.grid.cv_repeats = std::stoi(value);
            else if (key == "classes") cfg.classes = split_list(value);
            else throw SchemaError(where + ": unknown key '" + key + "'");
        } catch (const std::invalid_argument&) {
            throw SchemaError(where + ": bad value '" + value + "' for " + key);
        } catch (const std::out_of_range&) {
            throw SchemaError(where + ": value out of range for " + key);
        }
    }
    cfg.validate();
}

}  // namespace ciqa
