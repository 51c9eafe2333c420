#include "pgprec/epoch_log.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "pgprec/errors.hpp"

namespace pgprec {

void write_epoch_csv(const std::filesystem::path& path, const std::vector<EpochLog>& logs) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write epoch log: " + path.string());
  out << "epoch,rec,cl_user,cl_item,l2,total,val_recall10,seconds\n";
  char buf[256];
  for (const auto& log : logs) {
    std::snprintf(buf, sizeof(buf), "%d,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n",
                  log.epoch, log.loss.rec, log.loss.cl_user, log.loss.cl_item,
                  log.loss.l2, log.loss.total, log.val_recall, log.seconds);
    out << buf;
  }
}

std::vector<EpochLog> read_epoch_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open epoch log: " + path.string());
  std::vector<EpochLog> logs;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line.rfind("epoch,", 0) == 0) continue;
    std::stringstream ss(line);
    std::string field;
    std::vector<std::string> fields;
    while (std::getline(ss, field, ',')) fields.push_back(field);
    if (fields.size() != 8) throw DataError("malformed epoch csv line: " + line);
    EpochLog log;
    log.epoch = std::atoi(fields[0].c_str());
    log.loss.rec = std::strtod(fields[1].c_str(), nullptr);
    log.loss.cl_user = std::strtod(fields[2].c_str(), nullptr);
    log.loss.cl_item = std::strtod(fields[3].c_str(), nullptr);
    log.loss.l2 = std::strtod(fields[4].c_str(), nullptr);
    log.loss.total = std::strtod(fields[5].c_str(), nullptr);
    log.val_recall = std::strtod(fields[6].c_str(), nullptr);
    log.seconds = std::strtod(fields[7].c_str(), nullptr);
    logs.push_back(log);
  }
  return logs;
}

}  // namespace pgprec
