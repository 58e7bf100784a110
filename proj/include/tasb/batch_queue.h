// Copyright 2026 The tasb Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef TASB_BATCH_QUEUE_H_
#define TASB_BATCH_QUEUE_H_

#include <condition_variable>
#include <cstddef>
#include <deque>
#include <exception>
#include <memory>
#include <mutex>
#include <thread>

#include "tasb/sampler.h"

namespace tasb {

class BatchSource {
 public:
  virtual ~BatchSource() = default;
  // Blocks until a batch is available; rethrows a producer failure.
  virtual Batch next() = 0;
};

// Single-threaded: batches are drawn on the caller's thread.
class DirectBatchSource final : public BatchSource {
 public:
  explicit DirectBatchSource(BatchSampler sampler)
      : sampler_(std::move(sampler)) {}
  Batch next() override { return sampler_.next(); }

 private:
  BatchSampler sampler_;
};

// One producer thread keeps up to `capacity` batches ready. Batches arrive in
// production order, so the stream equals DirectBatchSource's for the same
// sampler. Destruction stops and joins the producer.
class BatchQueue final : public BatchSource {
 public:
  BatchQueue(BatchSampler sampler, std::size_t capacity);
  ~BatchQueue() override;

  BatchQueue(const BatchQueue&) = delete;
  BatchQueue& operator=(const BatchQueue&) = delete;

  Batch next() override;
  void stop();

  std::size_t capacity() const { return capacity_; }
  std::size_t produced() const;

 private:
  void produce();

  BatchSampler sampler_;
  const std::size_t capacity_;
  mutable std::mutex mu_;
  std::condition_variable not_full_;
  std::condition_variable not_empty_;
  std::deque<Batch> ready_;
  std::exception_ptr failure_;
  bool stopping_ = false;
  std::size_t produced_ = 0;
  std::thread producer_;
};

std::unique_ptr<BatchSource> make_batch_source(BatchSampler sampler,
                                               bool threaded,
                                               std::size_t capacity);

}  // namespace tasb

#endif  // TASB_BATCH_QUEUE_H_
