#pragma once

#include <iosfwd>
#include <memory>
#include <string>

#include "lff/dataset.hpp"
#include "lff/oracle.hpp"

namespace lff {

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Versioned, self-describing text formats. Floats are written with full
// decimal precision so load(save(m)) reproduces predictions bitwise.
// An optional header comment (e.g. the config hash) goes on top as "# ...".

void save_model(std::ostream& os, const Model& model, const std::string& header_comment = "");
void save_model_file(const std::string& path, const Model& model,
                     const std::string& header_comment = "");
std::shared_ptr<Model> load_model(std::istream& is);
std::shared_ptr<Model> load_model_file(const std::string& path);

void save_dataset(std::ostream& os, const Dataset& ds, const std::string& header_comment = "");
void save_dataset_file(const std::string& path, const Dataset& ds,
                       const std::string& header_comment = "");
Dataset load_dataset(std::istream& is);
Dataset load_dataset_file(const std::string& path);

}  // namespace lff
