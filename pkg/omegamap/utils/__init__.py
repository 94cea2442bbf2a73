from .workers import THREADS_ENV, worker_count, run_batch
