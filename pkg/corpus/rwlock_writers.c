// expect: race_free
#include <pthread.h>
pthread_rwlock_t rw;
int g;
void *worker(void *p) {
  pthread_rwlock_wrlock(&rw);
  g = g + 1;
  pthread_rwlock_unlock(&rw);
  return NULL;
}
int main() {
  pthread_t a, b;
  pthread_create(&a, NULL, worker, NULL);
  pthread_create(&b, NULL, worker, NULL);
  return 0;
}
