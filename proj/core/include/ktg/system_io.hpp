#pragma once

#include "ktg/state_space.hpp"

#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

namespace ktg {

// Plain structured-text container for plants, controllers, and closed loops:
//
//   # comment
//   kind plant
//   block A 2 2
//     -0.04 1
//      0    -0.08
//   block B 2 1
//      1 1
//
// 'kind' is one of plant | controller | closed-loop; controllers and closed
// loops carry an 'order' line (controller state count). Matrix entries are
// whitespace-separated decimals; '#' starts a comment anywhere. Parsing and
// serialization round-trip bit-exactly (entries are written with %.17g).
struct SystemFile {
  enum class Kind { plant, controller, closed_loop };

  Kind kind = Kind::plant;
  Index order = 0;
  std::vector<std::pair<std::string, RealMatrix>> blocks;

  const RealMatrix* find(const std::string& name) const;
  const RealMatrix& expect(const std::string& name) const;

  StateSpace to_state_space() const;   // plant or closed-loop kinds
  Controller to_controller() const;    // controller kind

  static SystemFile from_plant(const StateSpace& plant);
  static SystemFile from_controller(const Controller& controller);
  static SystemFile from_closed_loop(const StateSpace& loop, Index order);
};

std::string to_string(SystemFile::Kind kind);

// Parse with line:column diagnostics (thrown as invalid_input, prefixed by
// `name`).
SystemFile parse_system_file(std::istream& in, const std::string& name = "<input>");
SystemFile parse_system_file(const std::string& text, const std::string& name);

void serialize(const SystemFile& file, std::ostream& out);
std::string to_text(const SystemFile& file);

SystemFile load_system_file(const std::string& path);
void save_system_file(const SystemFile& file, const std::string& path);

}  // namespace ktg
