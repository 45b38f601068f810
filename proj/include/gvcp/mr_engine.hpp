#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <concepts>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <functional>
#include <iterator>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <thread>
#include <type_traits>
#include <utility>
#include <vector>

#include "gvcp/error.hpp"

namespace gvcp::mr {

template <typename K, typename V>
struct Record {
  K key;
  V value;

  friend bool operator==(const Record&, const Record&) = default;
};

using ByteRecord = Record<std::string, std::string>;

/// Side data broadcast to every reducer of a job.
using JobConfig = std::map<std::string, std::string>;

/// Raised when a map or reduce contract throws; carries the failing location.
class JobError : public Error {
 public:
  JobError(std::string phase, std::size_t partition, std::string key, std::string cause,
           std::optional<ErrorCode> cause_code)
      : Error(ErrorCode::JobFailure, phase + " failed (partition " + std::to_string(partition) + ", key " + key +
                                         "): " + cause),
        phase_(std::move(phase)),
        partition_(partition),
        key_(std::move(key)),
        cause_code_(cause_code) {}

  const std::string& phase() const { return phase_; }
  std::size_t partition() const { return partition_; }
  const std::string& key() const { return key_; }
  std::optional<ErrorCode> cause_code() const { return cause_code_; }

 private:
  std::string phase_;
  std::size_t partition_;
  std::string key_;
  std::optional<ErrorCode> cause_code_;
};

namespace detail {

template <typename T>
concept Streamable = requires(std::ostream& os, const T& t) { os << t; };

template <typename K>
std::string describe_key(const K& key) {
  if constexpr (Streamable<K>) {
    std::ostringstream ss;
    ss << key;
    return ss.str();
  } else {
    return "<opaque>";
  }
}

inline std::uint64_t fnv1a(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : bytes) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline JobError wrap_failure(std::exception_ptr ep, const std::string& phase, std::size_t partition,
                             const std::string& key) {
  try {
    std::rethrow_exception(ep);
  } catch (const Error& e) {
    return JobError(phase, partition, key, e.what(), e.code());
  } catch (const std::exception& e) {
    return JobError(phase, partition, key, e.what(), std::nullopt);
  } catch (...) {
    return JobError(phase, partition, key, "unknown exception", std::nullopt);
  }
}

}  // namespace detail

/// Stable across platforms and runs: integers by value, strings by FNV-1a.
template <typename K>
std::size_t default_partition(const K& key, std::size_t partitions) {
  if constexpr (std::is_integral_v<K>) {
    return static_cast<std::size_t>(static_cast<std::uint64_t>(key) % partitions);
  } else if constexpr (std::is_convertible_v<const K&, std::string_view>) {
    return static_cast<std::size_t>(detail::fnv1a(std::string_view(key)) % partitions);
  } else {
    return std::hash<K>{}(key) % partitions;
  }
}

/// What a mapper sees: an emitter for intermediate records plus a channel for
/// publishing side data to the reduce phase.
template <typename K, typename V>
class MapContext {
 public:
  explicit MapContext(JobConfig config) : config_(std::move(config)) {}

  void emit(K key, V value) {
    if constexpr (std::is_same_v<K, std::string>) {
      if (key.empty()) throw Error(ErrorCode::InvalidParameter, "record keys must be non-empty");
    }
    emitted_.push_back({std::move(key), std::move(value)});
  }

  void publish(std::string key, std::string value) { config_[std::move(key)] = std::move(value); }

  const JobConfig& config() const { return config_; }

  std::vector<Record<K, V>>& emitted() { return emitted_; }
  JobConfig& mutable_config() { return config_; }

 private:
  JobConfig config_;
  std::vector<Record<K, V>> emitted_;
};

template <typename InRecord, typename MidKey, typename MidValue, typename OutRecord>
struct JobSpec {
  using Context = MapContext<MidKey, MidValue>;
  using MapFn = std::function<void(const InRecord&, Context&)>;
  using FinishFn = std::function<void(Context&)>;
  using ReduceFn = std::function<void(const MidKey&, std::span<const MidValue>, const JobConfig&, std::vector<OutRecord>&)>;
  using PartitionFn = std::function<std::size_t(const MidKey&)>;

  MapFn map;
  FinishFn map_finish;  // optional end-of-input hook
  ReduceFn reduce;
  std::size_t partition_count = 1;
  PartitionFn partitioner;  // default_partition when empty
  JobConfig config;
};

struct RunOptions {
  std::size_t workers = 1;
  std::ostream* trace = nullptr;  // tab-separated phase log
};

/// Runs `fn(i)` for i in [0, count) on up to `workers` threads. An exception
/// thrown by `fn(i)` is stored in `errors[i]`.
template <typename Fn>
void parallel_for(std::size_t count, std::size_t workers, Fn&& fn, std::vector<std::exception_ptr>& errors) {
  errors.assign(count, nullptr);
  auto body = [&](std::size_t i) {
    try {
      fn(i);
    } catch (...) {
      errors[i] = std::current_exception();
    }
  };
  workers = std::min(std::max<std::size_t>(workers, 1), count);
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::jthread> threads;
  threads.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    threads.emplace_back([&] {
      for (std::size_t i = next.fetch_add(1); i < count; i = next.fetch_add(1)) body(i);
    });
  }
}

/// Executes one job: sequential map over `input` in order, shuffle into
/// partitions, sort and group by key (values in emission order), reduce each
/// group. Output is partition-major, ascending key within a partition, and
/// never depends on `opts.workers`.
template <typename InRecord, typename MidKey, typename MidValue, typename OutRecord>
std::vector<OutRecord> run_job(const JobSpec<InRecord, MidKey, MidValue, OutRecord>& spec,
                               std::span<const InRecord> input, const RunOptions& opts = {}) {
  using Clock = std::chrono::steady_clock;
  using Mid = Record<MidKey, MidValue>;
  if (spec.partition_count < 1) throw Error(ErrorCode::InvalidParameter, "partition count must be >= 1");
  if (!spec.map || !spec.reduce) throw Error(ErrorCode::InvalidParameter, "job needs both map and reduce");
  const std::size_t partitions = spec.partition_count;
  auto elapsed_us = [](Clock::time_point since) {
    return std::chrono::duration_cast<std::chrono::microseconds>(Clock::now() - since).count();
  };

  // Map.
  auto t0 = Clock::now();
  MapContext<MidKey, MidValue> ctx(spec.config);
  for (std::size_t i = 0; i < input.size(); ++i) {
    try {
      spec.map(input[i], ctx);
    } catch (...) {
      throw detail::wrap_failure(std::current_exception(), "map", 0, "input#" + std::to_string(i));
    }
  }
  if (spec.map_finish) {
    try {
      spec.map_finish(ctx);
    } catch (...) {
      throw detail::wrap_failure(std::current_exception(), "map", 0, "end-of-input");
    }
  }
  std::vector<Mid> emitted = std::move(ctx.emitted());
  const JobConfig reduce_config = std::move(ctx.mutable_config());
  if (opts.trace)
    *opts.trace << "map\t" << input.size() << '\t' << emitted.size() << "\t-\t" << elapsed_us(t0) << '\n';

  // Shuffle: route, then stable-sort each partition so equal keys keep emission order.
  t0 = Clock::now();
  std::vector<std::vector<Mid>> parts(partitions);
  for (auto& rec : emitted) {
    const std::size_t p = spec.partitioner ? spec.partitioner(rec.key) : default_partition(rec.key, partitions);
    if (p >= partitions)
      throw JobError("shuffle", p, detail::describe_key(rec.key), "partitioner returned out-of-range index",
                     ErrorCode::InvalidParameter);
    parts[p].push_back(std::move(rec));
  }
  emitted.clear();

  struct Group {
    std::size_t partition;
    std::size_t begin;
    std::size_t end;
  };
  std::vector<std::vector<MidValue>> part_values(partitions);
  std::vector<MidKey> group_keys;
  std::vector<Group> groups;
  for (std::size_t p = 0; p < partitions; ++p) {
    auto& recs = parts[p];
    std::stable_sort(recs.begin(), recs.end(), [](const Mid& a, const Mid& b) { return a.key < b.key; });
    part_values[p].reserve(recs.size());
    for (std::size_t i = 0; i < recs.size(); ++i) {
      if (i == 0 || recs[i - 1].key < recs[i].key) {
        groups.push_back({p, i, i});
        group_keys.push_back(recs[i].key);
      }
      part_values[p].push_back(std::move(recs[i].value));
      groups.back().end = i + 1;
    }
  }
  if (opts.trace) {
    *opts.trace << "shuffle\t" << groups.size() << '\t' << partitions << '\t';
    for (std::size_t p = 0; p < partitions; ++p) *opts.trace << (p ? "," : "") << parts[p].size();
    *opts.trace << '\t' << elapsed_us(t0) << '\n';
  }
  parts.clear();

  // Reduce.
  t0 = Clock::now();
  std::vector<std::vector<OutRecord>> outputs(groups.size());
  std::vector<std::exception_ptr> errors;
  parallel_for(
      groups.size(), opts.workers,
      [&](std::size_t g) {
        const Group& grp = groups[g];
        std::span<const MidValue> values(part_values[grp.partition].data() + grp.begin, grp.end - grp.begin);
        spec.reduce(group_keys[g], values, reduce_config, outputs[g]);
      },
      errors);
  for (std::size_t g = 0; g < errors.size(); ++g)
    if (errors[g]) throw detail::wrap_failure(errors[g], "reduce", groups[g].partition, detail::describe_key(group_keys[g]));

  std::size_t total = 0;
  for (const auto& o : outputs) total += o.size();
  std::vector<OutRecord> result;
  result.reserve(total);
  for (auto& o : outputs) std::move(o.begin(), o.end(), std::back_inserter(result));
  if (opts.trace)
    *opts.trace << "reduce\t" << groups.size() << '\t' << result.size() << "\t-\t" << elapsed_us(t0) << '\n';
  return result;
}

template <typename InRecord, typename MidKey, typename MidValue, typename OutRecord>
std::vector<OutRecord> run_job(const JobSpec<InRecord, MidKey, MidValue, OutRecord>& spec,
                               const std::vector<InRecord>& input, const RunOptions& opts = {}) {
  return run_job(spec, std::span<const InRecord>(input), opts);
}

}  // namespace gvcp::mr
