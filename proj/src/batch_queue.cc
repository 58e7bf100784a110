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

#include "tasb/batch_queue.h"

namespace tasb {

BatchQueue::BatchQueue(BatchSampler sampler, std::size_t capacity)
    : sampler_(std::move(sampler)), capacity_(capacity) {
  if (capacity_ < 1) throw Error("batch queue capacity must be >= 1");
  producer_ = std::thread([this] { produce(); });
}

BatchQueue::~BatchQueue() {
  stop();
  if (producer_.joinable()) producer_.join();
}

void BatchQueue::stop() {
  {
    std::lock_guard lock(mu_);
    stopping_ = true;
  }
  not_full_.notify_all();
  not_empty_.notify_all();
}

std::size_t BatchQueue::produced() const {
  std::lock_guard lock(mu_);
  return produced_;
}

void BatchQueue::produce() {
  while (true) {
    {
      std::unique_lock lock(mu_);
      not_full_.wait(lock,
                     [&] { return stopping_ || ready_.size() < capacity_; });
      if (stopping_) return;
    }
    // The sampler is touched only by this thread.
    try {
      Batch batch = sampler_.next();
      std::lock_guard lock(mu_);
      if (stopping_) return;
      ready_.push_back(std::move(batch));
      ++produced_;
    } catch (...) {
      std::lock_guard lock(mu_);
      failure_ = std::current_exception();
      not_empty_.notify_all();
      return;
    }
    not_empty_.notify_one();
  }
}

Batch BatchQueue::next() {
  std::unique_lock lock(mu_);
  not_empty_.wait(lock,
                  [&] { return !ready_.empty() || failure_ || stopping_; });
  if (!ready_.empty()) {
    Batch batch = std::move(ready_.front());
    ready_.pop_front();
    lock.unlock();
    not_full_.notify_one();
    return batch;
  }
  if (failure_) std::rethrow_exception(failure_);
  throw Error("batch queue stopped");
}

std::unique_ptr<BatchSource> make_batch_source(BatchSampler sampler,
                                               bool threaded,
                                               std::size_t capacity) {
  if (threaded) {
    return std::make_unique<BatchQueue>(std::move(sampler), capacity);
  }
  return std::make_unique<DirectBatchSource>(std::move(sampler));
}

}  // namespace tasb
