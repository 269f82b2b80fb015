"""
Thread pool over indexed work items.

Results are collected by index, so the output order (and anything reduced from
it in order) does not depend on the number of threads. numpy releases the GIL
inside the batched array kernels, which is where the trajectory work spends
its time.
"""

from __future__ import absolute_import
from __future__ import division
from __future__ import print_function

import sys
import threading
from queue import Empty, Queue

from tqdm import tqdm

from railsim.tools.utils import create_logger

_logger = create_logger('railsim.parallel')


def run_indexed(work_fn, n_items, num_threads=1, progress=False, desc=None):
    """
    :param work_fn: callable taking the item index, returning its result
    :param n_items: number of work items
    :param num_threads: number of worker threads
    :param progress: show a tqdm bar on stderr
    :param desc: label of the progress bar
    :return: list of results ordered by index
    """
    results = [None] * n_items
    errors = []
    lock = threading.Lock()
    bar = tqdm(total=n_items, desc=desc, disable=not progress, file=sys.stderr, leave=False)

    # set up a queue to hold all the jobs
    q = Queue(maxsize=0)
    for i in range(n_items):
        q.put(i)

    def collect(thread_id):
        while True:
            try:
                i = q.get_nowait()
            except Empty:
                return
            try:
                if not errors:
                    results[i] = work_fn(i)
            except Exception as e:  # re-raised by the caller below
                _logger.debug('thread_id {}: work item {} failed: {}'.format(thread_id, i, e))
                with lock:
                    errors.append((i, e))
            finally:
                with lock:
                    bar.update(1)
                # signal to the queue that task has been processed
                q.task_done()

    num_threads = max(1, min(int(num_threads), n_items))
    if num_threads == 1:
        collect(0)
    else:
        for thread_id in range(num_threads):
            worker = threading.Thread(target=collect, args=(thread_id,))
            worker.daemon = True
            worker.start()
        q.join()
    bar.close()

    if errors:
        raise min(errors, key=lambda item: item[0])[1]
    return results
