// expect: race
// allow: unknown
// The lock is only taken on some paths.
#include <pthread.h>
pthread_mutex_t m;
int g;
void *worker(void *p) {
  int c = __VERIFIER_nondet_int();
  if (c) pthread_mutex_lock(&m);
  g = g + 1;
  if (c) pthread_mutex_unlock(&m);
  return NULL;
}
int main() {
  pthread_t a, b;
  pthread_create(&a, NULL, worker, NULL);
  pthread_create(&b, NULL, worker, NULL);
  return 0;
}
