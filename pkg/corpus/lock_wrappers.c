// expect: race_free
#include <pthread.h>
pthread_mutex_t m;
int total;
void acquire() { pthread_mutex_lock(&m); }
void release() { pthread_mutex_unlock(&m); }
void *worker(void *p) {
  acquire();
  total = total + 1;
  release();
  return NULL;
}
int main() {
  pthread_t a, b;
  pthread_create(&a, NULL, worker, NULL);
  pthread_create(&b, NULL, worker, NULL);
  return 0;
}
