#include "ktg/system_io.hpp"

#include <cctype>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace ktg {

std::string to_string(SystemFile::Kind kind) {
  switch (kind) {
    case SystemFile::Kind::plant: return "plant";
    case SystemFile::Kind::controller: return "controller";
    case SystemFile::Kind::closed_loop: return "closed-loop";
  }
  throw invalid_input("unknown system file kind");
}

const RealMatrix* SystemFile::find(const std::string& name) const {
  for (const auto& [n, m] : blocks)
    if (n == name) return &m;
  return nullptr;
}

const RealMatrix& SystemFile::expect(const std::string& name) const {
  const RealMatrix* m = find(name);
  if (!m) throw invalid_input("system file: missing required block '" + name + "'");
  return *m;
}

StateSpace to_state_space_impl(const SystemFile& f) {
  const RealMatrix& A = f.expect("A");
  if (f.kind == SystemFile::Kind::closed_loop) {
    require(f.order >= 0 && f.order < A.rows(),
            "system file: closed-loop order must lie in [0, states)");
    return StateSpace(A, RealMatrix::Zero(A.rows(), 0),
                      RealMatrix::Zero(0, A.rows()));
  }
  const RealMatrix& B = f.expect("B");
  const RealMatrix& C = f.expect("C");
  if (const RealMatrix* D = f.find("D")) return StateSpace(A, B, C, *D);
  return StateSpace(A, B, C);
}

StateSpace SystemFile::to_state_space() const {
  require(kind != Kind::controller,
          "system file: to_state_space needs a plant or closed-loop file");
  return to_state_space_impl(*this);
}

Controller SystemFile::to_controller() const {
  require(kind == Kind::controller, "system file: to_controller needs kind controller");
  const RealMatrix& D_K = expect("D_K");
  if (order == 0) return Controller::make_static(D_K);
  return Controller::make_dynamic(expect("A_K"), expect("B_K"), expect("C_K"), D_K);
}

SystemFile SystemFile::from_plant(const StateSpace& plant) {
  SystemFile f;
  f.kind = Kind::plant;
  f.blocks.emplace_back("A", plant.A);
  f.blocks.emplace_back("B", plant.B);
  f.blocks.emplace_back("C", plant.C);
  if (!plant.strictly_proper()) f.blocks.emplace_back("D", plant.D);
  return f;
}

SystemFile SystemFile::from_controller(const Controller& controller) {
  SystemFile f;
  f.kind = Kind::controller;
  f.order = controller.order;
  if (controller.order > 0) {
    f.blocks.emplace_back("A_K", controller.A_K);
    f.blocks.emplace_back("B_K", controller.B_K);
    f.blocks.emplace_back("C_K", controller.C_K);
  }
  f.blocks.emplace_back("D_K", controller.D_K);
  return f;
}

SystemFile SystemFile::from_closed_loop(const StateSpace& loop, Index order) {
  SystemFile f;
  f.kind = Kind::closed_loop;
  f.order = order;
  f.blocks.emplace_back("A", loop.A);
  return f;
}

namespace {

struct Cursor {
  const std::string& text;
  const std::string& name;
  std::size_t pos = 0;
  int line = 1, col = 1;

  [[noreturn]] void fail(const std::string& what) const {
    throw invalid_input(name + ":" + std::to_string(line) + ":" +
                        std::to_string(col) + ": " + what);
  }

  bool eof() const { return pos >= text.size(); }

  char peek() const { return text[pos]; }

  void advance() {
    if (text[pos] == '\n') { ++line; col = 1; } else { ++col; }
    ++pos;
  }

  void skip_space_and_comments() {
    while (!eof()) {
      char c = peek();
      if (c == '#') {
        while (!eof() && peek() != '\n') advance();
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        advance();
      } else {
        break;
      }
    }
  }

  std::string word() {
    skip_space_and_comments();
    if (eof()) fail("unexpected end of input (expected a word)");
    std::size_t start = pos;
    int start_col = col, start_line = line;
    while (!eof() && !std::isspace(static_cast<unsigned char>(peek())) && peek() != '#')
      advance();
    if (pos == start) {
      line = start_line; col = start_col;
      fail("expected a word");
    }
    return text.substr(start, pos - start);
  }

  double number() {
    skip_space_and_comments();
    if (eof()) fail("unexpected end of input (expected a number)");
    int start_line = line, start_col = col;
    std::string tok = word();
    char* end = nullptr;
    double v = std::strtod(tok.c_str(), &end);
    if (end == tok.c_str() || *end != '\0') {
      line = start_line; col = start_col;
      fail("expected a number, got '" + tok + "'");
    }
    return v;
  }

  long integer(const std::string& what) {
    skip_space_and_comments();
    int start_line = line, start_col = col;
    std::string tok = word();
    char* end = nullptr;
    long v = std::strtol(tok.c_str(), &end, 10);
    if (end == tok.c_str() || *end != '\0' || v < 0) {
      line = start_line; col = start_col;
      fail("expected a nonnegative integer for " + what + ", got '" + tok + "'");
    }
    return v;
  }
};

}  // namespace

SystemFile parse_system_file(const std::string& text, const std::string& name) {
  Cursor cur{text, name};
  SystemFile file;
  bool kind_seen = false;

  while (true) {
    cur.skip_space_and_comments();
    if (cur.eof()) break;
    int kw_line = cur.line, kw_col = cur.col;
    std::string kw = cur.word();
    if (kw == "kind") {
      std::string k = cur.word();
      if (k == "plant") file.kind = SystemFile::Kind::plant;
      else if (k == "controller") file.kind = SystemFile::Kind::controller;
      else if (k == "closed-loop") file.kind = SystemFile::Kind::closed_loop;
      else cur.fail("unknown kind '" + k + "' (expected plant|controller|closed-loop)");
      kind_seen = true;
    } else if (kw == "order") {
      file.order = static_cast<Index>(cur.integer("order"));
    } else if (kw == "block") {
      std::string bname = cur.word();
      if (file.find(bname)) cur.fail("duplicate block '" + bname + "'");
      Index rows = static_cast<Index>(cur.integer("rows"));
      Index cols = static_cast<Index>(cur.integer("cols"));
      RealMatrix M(rows, cols);
      for (Index i = 0; i < rows; ++i)
        for (Index j = 0; j < cols; ++j) M(i, j) = cur.number();
      file.blocks.emplace_back(std::move(bname), std::move(M));
    } else {
      cur.line = kw_line; cur.col = kw_col;
      cur.fail("unknown keyword '" + kw + "' (expected kind|order|block)");
    }
  }
  if (!kind_seen)
    throw invalid_input(name + ": missing 'kind' line");
  return file;
}

SystemFile parse_system_file(std::istream& in, const std::string& name) {
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_system_file(buf.str(), name);
}

void serialize(const SystemFile& file, std::ostream& out) {
  out << "kind " << to_string(file.kind) << "\n";
  if (file.kind != SystemFile::Kind::plant) out << "order " << file.order << "\n";
  char buf[40];
  for (const auto& [name, M] : file.blocks) {
    out << "block " << name << ' ' << M.rows() << ' ' << M.cols() << "\n";
    for (Index i = 0; i < M.rows(); ++i) {
      for (Index j = 0; j < M.cols(); ++j) {
        std::snprintf(buf, sizeof buf, "%.17g", M(i, j));
        out << (j == 0 ? "  " : " ") << buf;
      }
      out << "\n";
    }
  }
}

std::string to_text(const SystemFile& file) {
  std::ostringstream out;
  serialize(file, out);
  return out.str();
}

SystemFile load_system_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw invalid_input("cannot open system file: " + path);
  return parse_system_file(in, path);
}

void save_system_file(const SystemFile& file, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw invalid_input("cannot write system file: " + path);
  serialize(file, out);
  if (!out) throw invalid_input("write failed: " + path);
}

}  // namespace ktg
