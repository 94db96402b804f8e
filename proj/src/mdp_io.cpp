#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>

#include "dac/mdp.hpp"

namespace dac {

namespace {

std::string fmt(double x) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

[[noreturn]] void parse_error(int line_no, const std::string& what) {
  throw std::invalid_argument("MDP file line " + std::to_string(line_no) + ": " + what);
}

}  // namespace

void write_mdp(std::ostream& out, const TabularMdp& mdp) {
  const int S = mdp.num_states();
  const int A = mdp.num_actions();
  out << "states " << S << "\n";
  out << "actions " << A << "\n";
  out << "discount " << fmt(mdp.discount()) << "\n";
  for (int s = 0; s < S; ++s) {
    if (mdp.initial()(s) != 0.0) out << "initial " << s << " " << fmt(mdp.initial()(s)) << "\n";
  }
  for (int s = 0; s < S; ++s) {
    for (int a = 0; a < A; ++a) {
      for (int n = 0; n < S; ++n) {
        const double p = mdp.transition(s, a, n);
        if (p != 0.0) out << "transition " << s << " " << a << " " << n << " " << fmt(p) << "\n";
      }
    }
  }
  for (int s = 0; s < S; ++s) {
    for (int a = 0; a < A; ++a) {
      const double r = mdp.reward()(s, a);
      if (r != 0.0) out << "reward " << s << " " << a << " " << fmt(r) << "\n";
    }
  }
}

TabularMdp read_mdp(std::istream& in) {
  int S = -1;
  int A = -1;
  double gamma = -1.0;
  Matrix P;
  Table R;
  Vector rho;

  auto ensure_storage = [&](int line_no) {
    if (S <= 0 || A <= 0) parse_error(line_no, "'states' and 'actions' must come first");
    if (P.size() == 0) {
      P = Matrix::Zero(static_cast<Eigen::Index>(S) * A, S);
      R = Table::Zero(S, A);
      rho = Vector::Zero(S);
    }
  };
  auto check_index = [&](int line_no, int v, int bound, const char* name) {
    if (v < 0 || v >= bound) parse_error(line_no, std::string(name) + " index out of range");
  };

  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    std::string key;
    if (!(ls >> key)) continue;
    if (key == "states") {
      if (!(ls >> S) || S <= 0) parse_error(line_no, "bad state count");
    } else if (key == "actions") {
      if (!(ls >> A) || A <= 0) parse_error(line_no, "bad action count");
    } else if (key == "discount") {
      if (!(ls >> gamma)) parse_error(line_no, "bad discount");
    } else if (key == "initial") {
      ensure_storage(line_no);
      int s;
      double p;
      if (!(ls >> s >> p)) parse_error(line_no, "expected 'initial <s> <p>'");
      check_index(line_no, s, S, "state");
      rho(s) = p;
    } else if (key == "transition") {
      ensure_storage(line_no);
      int s, a, n;
      double p;
      if (!(ls >> s >> a >> n >> p)) parse_error(line_no, "expected 'transition <s> <a> <s'> <p>'");
      check_index(line_no, s, S, "state");
      check_index(line_no, a, A, "action");
      check_index(line_no, n, S, "next state");
      P(static_cast<Eigen::Index>(s) * A + a, n) = p;
    } else if (key == "reward") {
      ensure_storage(line_no);
      int s, a;
      double r;
      if (!(ls >> s >> a >> r)) parse_error(line_no, "expected 'reward <s> <a> <r>'");
      check_index(line_no, s, S, "state");
      check_index(line_no, a, A, "action");
      R(s, a) = r;
    } else {
      parse_error(line_no, "unknown keyword '" + key + "'");
    }
    std::string extra;
    if (ls >> extra) parse_error(line_no, "trailing tokens");
  }
  if (gamma < 0.0) parse_error(line_no, "missing 'discount'");
  ensure_storage(line_no);
  return TabularMdp(std::move(P), std::move(R), std::move(rho), gamma);
}

}  // namespace dac
