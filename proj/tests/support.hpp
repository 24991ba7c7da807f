#pragma once

#include <memory>
#include <string>

#include "clg/estimation.hpp"
#include "clg/program.hpp"
#include "clg/quantitative.hpp"
#include "clg/resolution.hpp"

#ifndef CLG_DATA_DIR
#define CLG_DATA_DIR "data"
#endif

namespace fx {

inline std::string path(const std::string& rel) { return std::string(CLG_DATA_DIR) + "/" + rel; }

struct World {
  std::shared_ptr<const clg::Signature> sig;
  clg::Program prog;
  clg::VarPool pool;
  std::unique_ptr<clg::Engine> engine;

  World(const std::string& sig_text, const std::string& prog_text, const clg::Weights* w = nullptr)
      : sig(std::make_shared<const clg::Signature>(clg::Signature::parse(sig_text))),
        prog(clg::parse_program(prog_text, sig, w)) {
    engine = std::make_unique<clg::Engine>(prog, pool);
  }
  World(const World&) = delete;

  static std::unique_ptr<World> load(const std::string& dir, const std::string& sig = "types.sig",
                                     const std::string& prog = "program.clg") {
    return std::make_unique<World>(clg::read_file(path(dir + "/" + sig)), clg::read_file(path(dir + "/" + prog)));
  }

  clg::Goal goal(const std::string& text) { return clg::parse_goal(text, *sig, pool); }
  clg::TreeContext ctx() const { return {prog, pool}; }
  clg::Corpus corpus(const std::string& text) { return clg::parse_corpus(text, *sig, pool); }
};

}  // namespace fx
