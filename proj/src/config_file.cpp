#include "magnetoatom/config_file.hpp"

#include <cctype>
#include <fstream>
#include <sstream>

namespace magnetoatom {

namespace {

std::string trim(const std::string& s) {
    size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

double parse_number(const std::string& key, const std::string& value) {
    try {
        size_t pos = 0;
        const double v = std::stod(value, &pos);
        if (pos != value.size()) throw std::invalid_argument(value);
        return v;
    } catch (const std::exception&) {
        throw InvalidParameter("config: bad numeric value for '" + key + "': " + value);
    }
}

} // namespace

SystemSpec RunConfig::system() const {
    if (m2_infinite) return derive_system_infinite(e, m1);
    return derive_system(e, m1, m2);
}

FieldConfig RunConfig::fields(const SystemSpec& sys) const {
    return make_fields(sys, B_eff, P_eff, d);
}

RunConfig parse_config_text(const std::string& text) {
    RunConfig cfg;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw InvalidParameter("config line " + std::to_string(lineno) +
                                   ": expected key=value");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key == "e") {
            cfg.e = parse_number(key, value);
        } else if (key == "m1") {
            cfg.m1 = parse_number(key, value);
        } else if (key == "m2") {
            if (value == "inf") {
                cfg.m2_infinite = true;
            } else {
                cfg.m2 = parse_number(key, value);
                cfg.m2_infinite = false;
            }
        } else if (key == "B_eff") {
            cfg.B_eff = parse_number(key, value);
        } else if (key == "P_eff") {
            cfg.P_eff = parse_number(key, value);
        } else if (key == "d") {
            cfg.d = parse_number(key, value);
        } else {
            throw InvalidParameter("config line " + std::to_string(lineno) +
                                   ": unknown key '" + key + "'");
        }
    }
    return cfg;
}

RunConfig parse_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InvalidParameter("config: cannot open " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config_text(buf.str());
}

RunConfig preset_config(const std::string& name) {
    RunConfig cfg;
    if (name == "hydrogen") {
        cfg.m2 = 1836.15267;
    } else if (name == "hydrogen-inf") {
        cfg.m2_infinite = true;
    } else if (name == "positronium") {
        cfg.m2 = 1.0;
    } else {
        throw InvalidParameter("unknown system preset '" + name + "'");
    }
    return cfg;
}

} // namespace magnetoatom
