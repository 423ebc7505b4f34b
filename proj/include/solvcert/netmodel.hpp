#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "solvcert/linalg.hpp"

namespace solvcert {

// MATPOWER bus type codes.
inline constexpr int kBusPQ = 1;
inline constexpr int kBusPV = 2;
inline constexpr int kBusSlack = 3;

struct RawBus {
    long id = 0;
    int type_code = kBusPQ;
    double pd = 0.0;  // MW
    double qd = 0.0;  // MVAr
    double vm = 1.0;  // p.u.
    double va = 0.0;  // degrees
    bool operator==(const RawBus&) const = default;
};

struct RawBranch {
    long from = 0;
    long to = 0;
    double r = 0.0;
    double x = 0.0;
    double b = 0.0;
    double tap = 1.0;
    double shift = 0.0;  // degrees
    int status = 1;
    bool operator==(const RawBranch&) const = default;
};

struct RawGen {
    long bus = 0;
    double pg = 0.0;  // MW
    double qg = 0.0;  // MVAr
    int status = 1;
    bool operator==(const RawGen&) const = default;
};

/// The subset of a MATPOWER case the library reads, rows in file order.
struct RawCase {
    double base_mva = 100.0;
    std::vector<RawBus> buses;
    std::vector<RawBranch> branches;
    std::vector<RawGen> gens;
    bool operator==(const RawCase&) const = default;
};

/// Parses `mpc.baseMVA`, `mpc.bus`, `mpc.branch` and `mpc.gen` from MATPOWER
/// case text. Everything else in the file is ignored. Missing trailing columns
/// default to zero, except tap and status which default to one.
///
/// Throws ParseError (with line number) on malformed tables, a missing or
/// repeated slack bus, or duplicate bus ids.
RawCase parse_matpower(std::string_view text);

/// Canonical MATPOWER text for `raw`; parse_matpower reads it back unchanged.
std::string to_matpower(const RawCase& raw);

/// JSON mirror of RawCase:
///   {"base_mva": .., "buses": [{"id","type_code","Pd","Qd","Vm","Va"}],
///    "branches": [{"from","to","r","x","b","tap","shift","status"}],
///    "gens": [{"bus","Pg","Qg","status"}]}
RawCase parse_case_json(std::string_view text);
std::string to_case_json(const RawCase& raw);

/// Loads a case file, dispatching on extension (.json or MATPOWER text).
RawCase load_case(const std::string& path);

/// Checks the RawCase invariants (single slack, known branch endpoints,
/// positive base). Throws ParseError.
void validate(const RawCase& raw);

struct BuildOptions {
    bool include_line_charging = false;
};

/// Slack-reduced network. Internal index i = 0..n-1 follows the file order of
/// the PQ buses.
struct NetworkModel {
    std::size_t n = 0;
    Complex v0{1.0, 0.0};
    ComplexMatrix y;
    CVector y_slack_col;
    CVector v_zero;
    /// Net injections of the case in p.u.; loads are negative.
    CVector s_base;
    std::vector<long> bus_ids;  // internal index -> case bus id
    std::map<long, std::size_t> index_of;
    long slack_id = 0;
    double base_mva = 100.0;
};

/// Assembles the reduced admittance matrix from series branch admittances
/// (off-nominal tap Pi-model), solves for the zero-injection profile and
/// converts the case loading to p.u. net injections.
///
/// Bus shunts are always ignored; branch charging only with the option set.
/// Throws ModelError for PV buses, buses not connected to the slack, or a
/// singular reduced admittance matrix.
NetworkModel build_network(const RawCase& raw, const BuildOptions& opts = {});

/// The full (n+1) x (n+1) bus admittance matrix in case bus order, used for
/// diagnostics and tests.
ComplexMatrix build_ybus(const RawCase& raw, const BuildOptions& opts = {});

/// Two buses joined by R + jX, slack voltage 1, no load.
RawCase two_bus_case(double r, double x);

/// Deterministic synthetic radial feeder with `n_buses` buses (slack = bus 1).
/// Branch impedances and loads are drawn from ranges typical of 12.66 kV
/// feeders on a 10 MVA base.
RawCase synthetic_radial_feeder(std::size_t n_buses, std::uint64_t seed);

}  // namespace solvcert
