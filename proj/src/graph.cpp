#include "linkopt/graph.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <set>
#include <sstream>

namespace linkopt {

std::vector<int> LinkGraph::controlled_pages() const {
  std::set<int> pages;
  for (const Arc& a : facultative) pages.insert(a.src);
  return {pages.begin(), pages.end()};
}

void LinkGraph::validate() const {
  auto check_arc = [&](const Arc& a) {
    if (a.src < 0 || a.src >= n || a.dst < 0 || a.dst >= n)
      throw std::invalid_argument("arc index out of range");
  };
  std::set<Arc> obl(obligatory.begin(), obligatory.end());
  std::set<Arc> fac(facultative.begin(), facultative.end());
  if (obl.size() != obligatory.size()) throw std::invalid_argument("duplicate obligatory arc");
  if (fac.size() != facultative.size()) throw std::invalid_argument("duplicate facultative arc");
  for (const Arc& a : obligatory) {
    check_arc(a);
    if (fac.count(a)) throw std::invalid_argument("arc in two classes");
  }
  for (const Arc& a : facultative) check_arc(a);
  for (int t : target_set)
    if (t < 0 || t >= n) throw std::invalid_argument("target node out of range");
  if (!labels.empty() && labels.size() != static_cast<std::size_t>(n))
    throw std::invalid_argument("label list size mismatch");
}

namespace {

std::string strip_comment(const std::string& line) {
  auto pos = line.find('#');
  return pos == std::string::npos ? line : line.substr(0, pos);
}

}  // namespace

LinkGraph parse_graph(const std::string& text, const ParseOptions& opts) {
  LinkGraph g;
  bool have_n = false;
  std::set<Arc> seen_o, seen_f, seen_p;
  std::set<int> seen_t;
  std::istringstream in(text);
  std::string raw;
  int lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    std::istringstream ls(strip_comment(raw));
    std::string tag;
    if (!(ls >> tag)) continue;

    if (tag == "n") {
      int count;
      if (!(ls >> count) || count <= 0) throw ParseError("invalid node count", lineno);
      if (have_n) throw ParseError("duplicate node count line", lineno);
      g.n = count;
      have_n = true;
      continue;
    }
    if (!have_n) throw ParseError("node count must come first", lineno);

    if (tag == "t") {
      int node;
      if (!(ls >> node)) throw ParseError("malformed target line", lineno);
      if (node < 0 || node >= g.n) throw ParseError("target node out of range", lineno);
      seen_t.insert(node);
      continue;
    }
    if (tag != "o" && tag != "p" && tag != "f") throw ParseError("unknown line class '" + tag + "'", lineno);

    Arc a;
    if (!(ls >> a.src >> a.dst)) throw ParseError("malformed arc line", lineno);
    std::string extra;
    if (ls >> extra) throw ParseError("trailing tokens on arc line", lineno);
    if (a.src < 0 || a.src >= g.n || a.dst < 0 || a.dst >= g.n)
      throw ParseError("arc index out of range", lineno);

    const int in_classes = (seen_o.count(a) ? 1 : 0) + (seen_p.count(a) ? 1 : 0) + (seen_f.count(a) ? 1 : 0);
    if (tag == "o") {
      if (in_classes && !seen_o.count(a)) throw ParseError("arc in two classes", lineno);
      if (seen_o.insert(a).second) g.obligatory.push_back(a);
    } else if (tag == "p") {
      if (in_classes && !seen_p.count(a)) throw ParseError("arc in two classes", lineno);
      seen_p.insert(a);  // prohibition is the default; recorded only for class checking
    } else {
      if (a.src == a.dst && !opts.allow_self_links)
        throw ParseError("facultative self-link (pass allow_self_links to keep it)", lineno);
      if (in_classes && !seen_f.count(a)) throw ParseError("arc in two classes", lineno);
      if (seen_f.insert(a).second) g.facultative.push_back(a);
    }
  }
  if (!have_n) throw ParseError("missing node count", 1);
  g.target_set.assign(seen_t.begin(), seen_t.end());
  g.validate();
  return g;
}

LinkGraph load_graph(const std::string& path, const ParseOptions& opts) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open graph file: " + path);
  std::ostringstream ss;
  ss << f.rdbuf();
  return parse_graph(ss.str(), opts);
}

std::string serialize(const LinkGraph& g) {
  std::ostringstream out;
  out << "n " << g.n << "\n";
  for (int t : g.target_set) out << "t " << t << "\n";
  for (const Arc& a : g.obligatory) out << "o " << a.src << " " << a.dst << "\n";
  for (const Arc& a : g.facultative) out << "f " << a.src << " " << a.dst << "\n";
  return out.str();
}

WeightVector project_box(std::span<const double> x) {
  WeightVector w;
  w.x.assign(x.begin(), x.end());
  project_box_inplace(w.x);
  return w;
}

void project_box_inplace(std::vector<double>& x) {
  for (double& v : x) v = std::min(1.0, std::max(0.0, v));
}

SparseMatrix assemble(const LinkGraph& g, const WeightVector& x) {
  if (x.size() != g.facultative.size())
    throw std::invalid_argument("weight vector length does not match facultative list");
  for (double v : x.x)
    if (v < 0.0 || v > 1.0) throw std::invalid_argument("weight outside [0,1]");
  std::vector<int> rows, cols;
  std::vector<double> vals;
  rows.reserve(g.obligatory.size() + g.facultative.size());
  cols.reserve(rows.capacity());
  vals.reserve(rows.capacity());
  for (const Arc& a : g.obligatory) {
    rows.push_back(a.src);
    cols.push_back(a.dst);
    vals.push_back(1.0);
  }
  for (std::size_t k = 0; k < g.facultative.size(); ++k) {
    rows.push_back(g.facultative[k].src);
    cols.push_back(g.facultative[k].dst);
    vals.push_back(x[k]);
  }
  return SparseMatrix::from_triplets(g.n, rows, cols, vals);
}

WeightVector parse_weights(const LinkGraph& g, const std::string& text) {
  WeightVector w;
  w.x.reserve(g.facultative.size());
  std::istringstream in(text);
  std::string raw;
  int lineno = 0;
  std::size_t k = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    std::istringstream ls(strip_comment(raw));
    int s, d;
    double v;
    if (!(ls >> s)) continue;
    if (!(ls >> d >> v)) throw ParseError("malformed weight line", lineno);
    if (k >= g.facultative.size()) throw ParseError("too many weight lines", lineno);
    if (g.facultative[k].src != s || g.facultative[k].dst != d)
      throw ParseError("weight line does not follow facultative-list order", lineno);
    if (v < 0.0 || v > 1.0) throw ParseError("weight outside [0,1]", lineno);
    w.x.push_back(v);
    ++k;
  }
  if (k != g.facultative.size()) throw ParseError("missing weight lines", lineno);
  return w;
}

WeightVector load_weights(const LinkGraph& g, const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open weights file: " + path);
  std::ostringstream ss;
  ss << f.rdbuf();
  return parse_weights(g, ss.str());
}

std::string serialize_weights(const LinkGraph& g, const WeightVector& x) {
  std::ostringstream out;
  char buf[64];
  for (std::size_t k = 0; k < g.facultative.size(); ++k) {
    std::snprintf(buf, sizeof buf, "%.17g", x[k]);
    out << g.facultative[k].src << " " << g.facultative[k].dst << " " << buf << "\n";
  }
  return out.str();
}

}  // namespace linkopt
