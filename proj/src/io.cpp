#include "copsched/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace copsched {

std::string fmt17(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0.0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out << content;
    out.flush();
    if (!out) throw std::runtime_error("write failed: " + path);
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

namespace {

std::vector<double> parse_csv_row(const std::string& line, const std::string& path) {
    std::vector<double> row;
    std::size_t pos = 0;
    while (pos <= line.size()) {
        std::size_t comma = line.find(',', pos);
        if (comma == std::string::npos) comma = line.size();
        const std::string tok = line.substr(pos, comma - pos);
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(tok, &used);
        } catch (const std::exception&) {
            throw std::runtime_error("malformed number '" + tok + "' in " + path);
        }
        while (used < tok.size() &&
               (tok[used] == ' ' || tok[used] == '\t' || tok[used] == '\r'))
            ++used;
        if (used != tok.size())
            throw std::runtime_error("malformed number '" + tok + "' in " + path);
        row.push_back(v);
        if (comma == line.size()) break;
        pos = comma + 1;
    }
    return row;
}

} // namespace

Instance load_instance_csv(const std::string& path) {
    std::istringstream in(read_text_file(path));
    std::vector<std::vector<double>> rows;
    std::string line;
    while (std::getline(in, line)) {
        while (!line.empty() && (line.back() == '\r' || line.back() == '\n'))
            line.pop_back();
        if (line.empty()) continue;
        rows.push_back(parse_csv_row(line, path));
    }
    if (rows.size() != 2)
        throw std::runtime_error(path + ": expected exactly 2 rows of times");
    if (rows[0].size() != rows[1].size() || rows[0].empty())
        throw std::runtime_error(path + ": rows must be non-empty and equal length");
    Instance inst{std::move(rows[0]), std::move(rows[1])};
    validate_instance(inst);
    return inst;
}

Instance load_instance_json(const std::string& path) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(read_text_file(path));
    } catch (const nlohmann::json::exception& e) {
        throw std::runtime_error(path + ": " + e.what());
    }
    if (!j.contains("t") || !j["t"].is_array() || j["t"].size() != 2)
        throw std::runtime_error(path + ": expected {\"t\": [[...],[...]]}" );
    Instance inst;
    inst.t1 = j["t"][0].get<std::vector<double>>();
    inst.t2 = j["t"][1].get<std::vector<double>>();
    if (inst.t1.size() != inst.t2.size() || inst.t1.empty())
        throw std::runtime_error(path + ": rows must be non-empty and equal length");
    validate_instance(inst);
    return inst;
}

Instance load_instance(const std::string& path) {
    const bool json = path.size() >= 5 && path.compare(path.size() - 5, 5, ".json") == 0;
    return json ? load_instance_json(path) : load_instance_csv(path);
}

Marginal load_marginal_json(const std::string& path) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(read_text_file(path));
    } catch (const nlohmann::json::exception& e) {
        throw std::runtime_error(path + ": " + e.what());
    }
    const std::string kind = j.value("kind", "piecewise");
    if (kind == "piecewise" || kind == "paper")
        return make_piecewise(j.value("a", 1.715), j.value("b", 0.76));
    if (kind == "transcendental") return make_transcendental();
    if (kind == "tabulated") {
        if (!j.contains("points") || !j["points"].is_array())
            throw std::runtime_error(path + ": tabulated marginal needs \"points\"");
        std::vector<std::pair<double, double>> pts;
        for (const auto& p : j["points"]) {
            if (!p.is_array() || p.size() != 2)
                throw std::runtime_error(path + ": each point must be [x, F]");
            pts.emplace_back(p[0].get<double>(), p[1].get<double>());
        }
        return make_tabulated(pts);
    }
    throw std::runtime_error(path + ": unknown marginal kind '" + kind + "'");
}

} // namespace copsched
