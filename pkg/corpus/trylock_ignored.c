// expect: race
// The result of the trylock is ignored, so the update may run unprotected.
#include <pthread.h>
int value;
pthread_mutex_t m;
void *worker(void *arg) {
  int r = pthread_mutex_trylock(&m);
  value = value + 1;
  if (r == 0)
    pthread_mutex_unlock(&m);
  return NULL;
}
int main() {
  pthread_t a, b;
  pthread_create(&a, NULL, worker, NULL);
  pthread_create(&b, NULL, worker, NULL);
  return 0;
}
