#include "solvcert/netmodel.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <optional>
#include <queue>
#include <random>
#include <set>
#include <sstream>

#include "json.hpp"

namespace solvcert {

namespace {

struct Row {
    std::vector<double> values;
    std::size_t line = 0;
};

struct Table {
    std::vector<Row> rows;
    std::size_t line = 0;
    bool present = false;
};

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

double parse_number(std::string_view tok, std::size_t line) {
    if (tok == "Inf" || tok == "inf") return std::numeric_limits<double>::infinity();
    if (tok == "-Inf" || tok == "-inf") return -std::numeric_limits<double>::infinity();
    if (!tok.empty() && tok.front() == '+') tok.remove_prefix(1);
    double v = 0.0;
    const auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (res.ec != std::errc{} || res.ptr != tok.data() + tok.size())
        throw ParseError("invalid number '" + std::string(tok) + "'", line);
    return v;
}

// Splits one table row segment into numeric tokens separated by blanks or commas.
std::vector<double> parse_row(std::string_view seg, std::size_t line) {
    std::vector<double> out;
    std::size_t i = 0;
    while (i < seg.size()) {
        while (i < seg.size() && (seg[i] == ' ' || seg[i] == '\t' || seg[i] == ',' || seg[i] == '\r')) ++i;
        std::size_t j = i;
        while (j < seg.size() && seg[j] != ' ' && seg[j] != '\t' && seg[j] != ',' && seg[j] != '\r') ++j;
        if (j > i) out.push_back(parse_number(seg.substr(i, j - i), line));
        i = j;
    }
    return out;
}

double col(const Row& r, std::size_t idx, double def = 0.0) {
    return idx < r.values.size() ? r.values[idx] : def;
}

long as_id(double v, std::size_t line) {
    if (v != std::floor(v)) throw ParseError("bus id must be an integer", line);
    return static_cast<long>(v);
}

std::string fmt(double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

}  // namespace

RawCase parse_matpower(std::string_view text) {
    std::map<std::string, Table> tables;
    std::optional<double> base_mva;
    std::size_t base_line = 0;

    Table* current = nullptr;
    bool skipping = false;  // inside a table we do not read

    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        auto eol = text.find('\n', pos);
        if (eol == std::string_view::npos) eol = text.size();
        std::string_view line = text.substr(pos, eol - pos);
        pos = eol + 1;
        ++line_no;

        if (const auto pct = line.find('%'); pct != std::string_view::npos) line = line.substr(0, pct);
        line = trim(line);
        if (line.empty()) {
            if (pos > text.size()) break;
            continue;
        }

        if (!current && !skipping) {
            if (!line.starts_with("mpc.")) {
                if (pos > text.size()) break;
                continue;
            }
            const auto eq = line.find('=');
            if (eq == std::string_view::npos) throw ParseError("expected '=' after field name", line_no);
            const std::string name(trim(line.substr(4, eq - 4)));
            std::string_view rhs = trim(line.substr(eq + 1));
            if (name == "baseMVA") {
                if (!rhs.empty() && rhs.back() == ';') rhs.remove_suffix(1);
                base_mva = parse_number(trim(rhs), line_no);
                base_line = line_no;
            } else if (!rhs.empty() && rhs.front() == '[') {
                if (name == "bus" || name == "branch" || name == "gen") {
                    Table& t = tables[name];
                    if (t.present) throw ParseError("table mpc." + name + " defined twice", line_no);
                    t.present = true;
                    t.line = line_no;
                    current = &t;
                } else {
                    skipping = true;
                }
                rhs.remove_prefix(1);
                line = rhs;
            } else {
                if (pos > text.size()) break;
                continue;
            }
        }

        // Inside a table: consume rows up to the closing bracket.
        const auto close = line.find(']');
        std::string_view body = close == std::string_view::npos ? line : line.substr(0, close);
        if (current) {
            std::size_t start = 0;
            while (start <= body.size()) {
                auto semi = body.find(';', start);
                if (semi == std::string_view::npos) semi = body.size();
                auto values = parse_row(body.substr(start, semi - start), line_no);
                if (!values.empty()) current->rows.push_back({std::move(values), line_no});
                start = semi + 1;
            }
        }
        if (close != std::string_view::npos) {
            const auto tail = trim(line.substr(close + 1));
            if (!tail.empty() && tail != ";") throw ParseError("unexpected text after ']'", line_no);
            current = nullptr;
            skipping = false;
        }
        if (pos > text.size()) break;
    }
    if (current || skipping) throw ParseError("unterminated table (missing ']')", line_no);
    if (!base_mva) throw ParseError("missing mpc.baseMVA", 0);
    if (!tables["bus"].present) throw ParseError("missing mpc.bus table", 0);
    if (!tables["branch"].present) throw ParseError("missing mpc.branch table", 0);

    RawCase raw;
    raw.base_mva = *base_mva;
    if (!(raw.base_mva > 0)) throw ParseError("baseMVA must be positive", base_line);

    std::set<long> ids;
    std::size_t slack_count = 0;
    for (const auto& r : tables["bus"].rows) {
        if (r.values.size() < 2) throw ParseError("bus row needs at least id and type", r.line);
        RawBus b;
        b.id = as_id(r.values[0], r.line);
        b.type_code = static_cast<int>(r.values[1]);
        b.pd = col(r, 2);
        b.qd = col(r, 3);
        b.vm = col(r, 7);
        b.va = col(r, 8);
        if (!ids.insert(b.id).second) throw ParseError("duplicate bus id " + std::to_string(b.id), r.line);
        if (b.type_code == kBusSlack) ++slack_count;
        raw.buses.push_back(b);
    }
    if (slack_count == 0) throw ParseError("no slack bus (type 3) in mpc.bus", tables["bus"].line);
    if (slack_count > 1) throw ParseError("more than one slack bus in mpc.bus", tables["bus"].line);

    for (const auto& r : tables["branch"].rows) {
        if (r.values.size() < 4) throw ParseError("branch row needs at least from, to, r, x", r.line);
        RawBranch br;
        br.from = as_id(r.values[0], r.line);
        br.to = as_id(r.values[1], r.line);
        br.r = r.values[2];
        br.x = r.values[3];
        br.b = col(r, 4);
        br.tap = col(r, 8, 1.0);
        br.shift = col(r, 9);
        br.status = static_cast<int>(col(r, 10, 1.0));
        if (!ids.contains(br.from) || !ids.contains(br.to))
            throw ParseError("branch references unknown bus", r.line);
        raw.branches.push_back(br);
    }

    for (const auto& r : tables["gen"].rows) {
        if (r.values.empty()) continue;
        RawGen g;
        g.bus = as_id(r.values[0], r.line);
        g.pg = col(r, 1);
        g.qg = col(r, 2);
        g.status = static_cast<int>(col(r, 7, 1.0));
        if (!ids.contains(g.bus)) throw ParseError("generator references unknown bus", r.line);
        raw.gens.push_back(g);
    }
    return raw;
}

void validate(const RawCase& raw) {
    if (!(raw.base_mva > 0)) throw ParseError("baseMVA must be positive", 0);
    std::set<long> ids;
    std::size_t slack = 0;
    for (const auto& b : raw.buses) {
        if (!ids.insert(b.id).second) throw ParseError("duplicate bus id " + std::to_string(b.id), 0);
        if (b.type_code == kBusSlack) ++slack;
    }
    if (slack != 1) throw ParseError(slack ? "more than one slack bus" : "no slack bus", 0);
    for (const auto& br : raw.branches)
        if (!ids.contains(br.from) || !ids.contains(br.to))
            throw ParseError("branch references unknown bus", 0);
    for (const auto& g : raw.gens)
        if (!ids.contains(g.bus)) throw ParseError("generator references unknown bus", 0);
}

std::string to_matpower(const RawCase& raw) {
    std::ostringstream os;
    os << "function mpc = solvcert_case\n";
    os << "mpc.version = '2';\n";
    os << "mpc.baseMVA = " << fmt(raw.base_mva) << ";\n\n";
    os << "%% bus_i type Pd Qd Gs Bs area Vm Va\n";
    os << "mpc.bus = [\n";
    for (const auto& b : raw.buses)
        os << '\t' << b.id << '\t' << b.type_code << '\t' << fmt(b.pd) << '\t' << fmt(b.qd)
           << "\t0\t0\t1\t" << fmt(b.vm) << '\t' << fmt(b.va) << ";\n";
    os << "];\n\n%% bus Pg Qg Qmax Qmin Vg mBase status\n";
    os << "mpc.gen = [\n";
    for (const auto& g : raw.gens)
        os << '\t' << g.bus << '\t' << fmt(g.pg) << '\t' << fmt(g.qg) << "\t0\t0\t1\t100\t" << g.status
           << ";\n";
    os << "];\n\n%% fbus tbus r x b rateA rateB rateC ratio angle status\n";
    os << "mpc.branch = [\n";
    for (const auto& br : raw.branches)
        os << '\t' << br.from << '\t' << br.to << '\t' << fmt(br.r) << '\t' << fmt(br.x) << '\t'
           << fmt(br.b) << "\t0\t0\t0\t" << fmt(br.tap) << '\t' << fmt(br.shift) << '\t' << br.status
           << ";\n";
    os << "];\n";
    return os.str();
}

RawCase parse_case_json(std::string_view text) {
    using nlohmann::json;
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("invalid JSON case: ") + e.what(), 0);
    }
    try {
        RawCase raw;
        raw.base_mva = j.at("base_mva").get<double>();
        for (const auto& b : j.at("buses")) {
            RawBus bus;
            bus.id = b.at("id").get<long>();
            bus.type_code = b.at("type_code").get<int>();
            bus.pd = b.value("Pd", 0.0);
            bus.qd = b.value("Qd", 0.0);
            bus.vm = b.value("Vm", 1.0);
            bus.va = b.value("Va", 0.0);
            raw.buses.push_back(bus);
        }
        for (const auto& b : j.at("branches")) {
            RawBranch br;
            br.from = b.at("from").get<long>();
            br.to = b.at("to").get<long>();
            br.r = b.at("r").get<double>();
            br.x = b.at("x").get<double>();
            br.b = b.value("b", 0.0);
            br.tap = b.value("tap", 1.0);
            br.shift = b.value("shift", 0.0);
            br.status = b.value("status", 1);
            raw.branches.push_back(br);
        }
        for (const auto& g : j.value("gens", json::array())) {
            RawGen gen;
            gen.bus = g.at("bus").get<long>();
            gen.pg = g.value("Pg", 0.0);
            gen.qg = g.value("Qg", 0.0);
            gen.status = g.value("status", 1);
            raw.gens.push_back(gen);
        }
        validate(raw);
        return raw;
    } catch (const json::exception& e) {
        throw ParseError(std::string("malformed JSON case: ") + e.what(), 0);
    }
}

std::string to_case_json(const RawCase& raw) {
    using nlohmann::json;
    json j;
    j["base_mva"] = raw.base_mva;
    j["buses"] = json::array();
    for (const auto& b : raw.buses)
        j["buses"].push_back({{"id", b.id}, {"type_code", b.type_code}, {"Pd", b.pd}, {"Qd", b.qd},
                              {"Vm", b.vm}, {"Va", b.va}});
    j["branches"] = json::array();
    for (const auto& br : raw.branches)
        j["branches"].push_back({{"from", br.from}, {"to", br.to}, {"r", br.r}, {"x", br.x}, {"b", br.b},
                                 {"tap", br.tap}, {"shift", br.shift}, {"status", br.status}});
    j["gens"] = json::array();
    for (const auto& g : raw.gens)
        j["gens"].push_back({{"bus", g.bus}, {"Pg", g.pg}, {"Qg", g.qg}, {"status", g.status}});
    return j.dump(2);
}

RawCase load_case(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open case file '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    const std::string text = ss.str();
    if (path.ends_with(".json")) return parse_case_json(text);
    return parse_matpower(text);
}

namespace {

struct BranchStamp {
    std::size_t f, t;
    Complex yff, yft, ytf, ytt;
};

std::vector<BranchStamp> branch_stamps(const RawCase& raw, const std::map<long, std::size_t>& pos,
                                       const BuildOptions& opts) {
    std::vector<BranchStamp> out;
    for (const auto& br : raw.branches) {
        if (br.status == 0) continue;
        const Complex z(br.r, br.x);
        if (z == Complex{})
            throw ModelError("branch " + std::to_string(br.from) + "-" + std::to_string(br.to) +
                             " has zero impedance");
        const Complex ys = 1.0 / z;
        const double bc = opts.include_line_charging ? br.b : 0.0;
        // A zero ratio in MATPOWER data means a line, i.e. nominal tap.
        const double ratio = br.tap == 0.0 ? 1.0 : br.tap;
        const Complex tap = std::polar(ratio, br.shift * std::numbers::pi / 180.0);
        const Complex ytt = ys + Complex(0.0, bc / 2.0);
        BranchStamp s;
        s.f = pos.at(br.from);
        s.t = pos.at(br.to);
        s.yff = ytt / (tap * std::conj(tap));
        s.yft = -ys / std::conj(tap);
        s.ytf = -ys / tap;
        s.ytt = ytt;
        out.push_back(s);
    }
    return out;
}

}  // namespace

ComplexMatrix build_ybus(const RawCase& raw, const BuildOptions& opts) {
    std::map<long, std::size_t> pos;
    for (std::size_t i = 0; i < raw.buses.size(); ++i) pos[raw.buses[i].id] = i;
    ComplexMatrix ybus(raw.buses.size(), raw.buses.size());
    for (const auto& s : branch_stamps(raw, pos, opts)) {
        ybus(s.f, s.f) += s.yff;
        ybus(s.f, s.t) += s.yft;
        ybus(s.t, s.f) += s.ytf;
        ybus(s.t, s.t) += s.ytt;
    }
    return ybus;
}

NetworkModel build_network(const RawCase& raw, const BuildOptions& opts) {
    validate(raw);

    NetworkModel model;
    model.base_mva = raw.base_mva;
    std::size_t slack_pos = 0;
    for (std::size_t i = 0; i < raw.buses.size(); ++i) {
        const auto& b = raw.buses[i];
        switch (b.type_code) {
            case kBusSlack:
                slack_pos = i;
                model.slack_id = b.id;
                model.v0 = std::polar(b.vm, b.va * std::numbers::pi / 180.0);
                break;
            case kBusPQ:
                model.index_of[b.id] = model.bus_ids.size();
                model.bus_ids.push_back(b.id);
                break;
            case kBusPV:
                throw ModelError("PQ-only scope: bus " + std::to_string(b.id) +
                                 " is a PV bus (type 2); voltage-controlled buses are not supported");
            default:
                throw ModelError("bus " + std::to_string(b.id) + " has unsupported type code " +
                                 std::to_string(b.type_code));
        }
    }
    if (std::abs(model.v0) == 0.0) throw ModelError("slack bus voltage magnitude is zero");
    model.n = model.bus_ids.size();
    const std::size_t n = model.n;

    // Connectivity over in-service branches, starting at the slack.
    {
        std::map<long, std::vector<long>> adj;
        for (const auto& br : raw.branches) {
            if (br.status == 0) continue;
            adj[br.from].push_back(br.to);
            adj[br.to].push_back(br.from);
        }
        std::set<long> seen{model.slack_id};
        std::queue<long> q;
        q.push(model.slack_id);
        while (!q.empty()) {
            const long u = q.front();
            q.pop();
            for (long v : adj[u])
                if (seen.insert(v).second) q.push(v);
        }
        for (long id : model.bus_ids)
            if (!seen.contains(id))
                throw ModelError("bus " + std::to_string(id) + " is not connected to the slack bus");
    }

    const ComplexMatrix ybus = build_ybus(raw, opts);
    // Map case order -> reduced index.
    std::vector<std::ptrdiff_t> reduced(raw.buses.size(), -1);
    for (std::size_t i = 0; i < raw.buses.size(); ++i)
        if (i != slack_pos) reduced[i] = static_cast<std::ptrdiff_t>(model.index_of.at(raw.buses[i].id));

    model.y = ComplexMatrix(n, n);
    model.y_slack_col.assign(n, Complex{});
    for (std::size_t i = 0; i < raw.buses.size(); ++i) {
        if (reduced[i] < 0) continue;
        const auto ri = static_cast<std::size_t>(reduced[i]);
        model.y_slack_col[ri] = ybus(i, slack_pos);
        for (std::size_t k = 0; k < raw.buses.size(); ++k)
            if (reduced[k] >= 0) model.y(ri, static_cast<std::size_t>(reduced[k])) = ybus(i, k);
    }

    if (n > 0) {
        // Write V0 = v0·1 + e. Full-row sums of the Y-bus are the shunt terms d,
        // summed per branch so plain series lines contribute exactly zero, and
        // Y e = -d v0. Shunt-free networks then give a bitwise flat profile.
        std::map<long, std::size_t> pos;
        for (std::size_t i = 0; i < raw.buses.size(); ++i) pos[raw.buses[i].id] = i;
        CVector rhs(n);
        bool any_shunt = false;
        for (const auto& st : branch_stamps(raw, pos, opts)) {
            const Complex df = st.yff + st.yft;
            const Complex dt = st.ytt + st.ytf;
            if (reduced[st.f] >= 0) rhs[static_cast<std::size_t>(reduced[st.f])] -= df * model.v0;
            if (reduced[st.t] >= 0) rhs[static_cast<std::size_t>(reduced[st.t])] -= dt * model.v0;
            any_shunt = any_shunt || df != Complex{} || dt != Complex{};
        }
        model.v_zero.assign(n, model.v0);
        try {
            LuFactorization<Complex> lu(model.y);
            if (any_shunt) {
                const CVector e = lu.solve(rhs);
                for (std::size_t i = 0; i < n; ++i) model.v_zero[i] += e[i];
            }
        } catch (const SingularMatrixError& e) {
            throw ModelError(std::string("reduced admittance matrix is singular: ") + e.what());
        }
    }

    model.s_base.assign(n, Complex{});
    for (const auto& b : raw.buses)
        if (auto it = model.index_of.find(b.id); it != model.index_of.end())
            model.s_base[it->second] = Complex(-b.pd, -b.qd) / raw.base_mva;
    for (const auto& g : raw.gens) {
        if (g.status == 0) continue;
        if (auto it = model.index_of.find(g.bus); it != model.index_of.end())
            model.s_base[it->second] += Complex(g.pg, g.qg) / raw.base_mva;
    }
    return model;
}

RawCase two_bus_case(double r, double x) {
    RawCase raw;
    raw.base_mva = 100.0;
    raw.buses = {RawBus{1, kBusSlack, 0, 0, 1.0, 0.0}, RawBus{2, kBusPQ, 0, 0, 1.0, 0.0}};
    raw.branches = {RawBranch{1, 2, r, x, 0.0, 1.0, 0.0, 1}};
    raw.gens = {RawGen{1, 0.0, 0.0, 1}};
    return raw;
}

RawCase synthetic_radial_feeder(std::size_t n_buses, std::uint64_t seed) {
    if (n_buses < 2) throw std::invalid_argument("synthetic feeder needs at least two buses");
    std::mt19937_64 rng(seed);
    // Portable uniform draw on [lo, hi).
    auto uniform = [&rng](double lo, double hi) {
        return lo + (hi - lo) * static_cast<double>(rng() >> 11) * 0x1.0p-53;
    };
    RawCase raw;
    raw.base_mva = 10.0;
    raw.buses.push_back(RawBus{1, kBusSlack, 0, 0, 1.0, 0.0});
    // Keep total load roughly independent of size so larger feeders stay solvable.
    const double load_scale = std::min(1.0, 32.0 / static_cast<double>(n_buses - 1));
    for (std::size_t k = 2; k <= n_buses; ++k) {
        const double pd = uniform(0.04, 0.25) * load_scale;
        const double qd = pd * uniform(0.3, 0.7);
        raw.buses.push_back(RawBus{static_cast<long>(k), kBusPQ, pd, qd, 1.0, 0.0});
        long parent = static_cast<long>(k) - 1;
        if (k > 2 && uniform(0.0, 1.0) < 0.25) {
            const double lo = std::max(1.0, static_cast<double>(k) - 12.0);
            parent = static_cast<long>(std::floor(uniform(lo, static_cast<double>(k))));
        }
        const double r = uniform(0.002, 0.02);
        const double x = r / uniform(0.6, 2.5);
        raw.branches.push_back(RawBranch{parent, static_cast<long>(k), r, x, 0.0, 1.0, 0.0, 1});
    }
    raw.gens.push_back(RawGen{1, 0.0, 0.0, 1});
    return raw;
}

}  // namespace solvcert
