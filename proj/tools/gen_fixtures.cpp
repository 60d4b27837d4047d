// gen_fixtures: regenerate the committed demo inputs under data/fixtures/.
// The airplane conversation is the hand-written script from the test
// fixtures; the score tables and dataset are small deterministic companions
// for the command-line walkthrough. Run from the repository root.

#include <cstdio>
#include <filesystem>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "fixtures/airplane.hpp"
#include "symbolact/analysis.hpp"
#include "symbolact/system_io.hpp"

using namespace symbolact;

namespace {

// demo1 shows the boarding signals, demo2 shows none of them
double demo_score(const std::string& image, size_t i) {
  if (image == "demo1") return i < 6 ? (86.0 - 3.0 * i) / 100.0 : (12.0 + 2.0 * (i % 4)) / 100.0;
  return (10.0 + 3.0 * (i % 7)) / 100.0;
}

}  // namespace

int main(int argc, char** argv) {
  std::string root = argc > 1 ? argv[1] : "data";
  std::string dir = root + "/fixtures";
  std::filesystem::create_directories(dir);

  write_file(dir + "/airplane_oracle.jsonl", airplane::table_jsonl());
  write_file(dir + "/airplane_activities.json", serialize_activities({airplane::spec()}));

  const std::vector<std::string>& texts = airplane::symbol_texts();
  ordered_json tables = ordered_json::object();
  for (const std::string& image : {"demo1", "demo2"}) {
    ordered_json per_image = ordered_json::object();
    for (size_t i = 0; i < texts.size(); ++i)
      per_image[texts[i]] = ordered_json{{"p", demo_score(image, i)}};
    tables[image] = std::move(per_image);
  }
  write_file(dir + "/airplane_scores.json", tables.dump(2) + "\n");

  Dataset dataset;
  DatasetRecord demo1;
  demo1.image_id = "demo1";
  demo1.gt_activities = {"boarding an airplane"};
  demo1.gt_symbols.insert(texts.begin(), texts.begin() + 6);
  DatasetRecord demo2;
  demo2.image_id = "demo2";
  for (DatasetRecord* rec : {&demo1, &demo2}) {
    std::map<std::string, ScoreEntry> table;
    for (size_t i = 0; i < texts.size(); ++i) {
      ScoreEntry e;
      e.direct = true;
      e.p = demo_score(rec->image_id, i);
      table[texts[i]] = e;
    }
    rec->score_table = std::move(table);
    dataset.push_back(std::move(*rec));
  }
  write_file(dir + "/airplane_dataset.json", serialize_dataset(dataset).dump(2) + "\n");

  std::printf("wrote airplane_oracle.jsonl, airplane_activities.json, airplane_scores.json, "
              "airplane_dataset.json under %s\n",
              dir.c_str());
  return 0;
}
