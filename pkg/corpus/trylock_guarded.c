// expect: race_free
#include <pthread.h>
int value;
pthread_mutex_t m;
void *worker(void *arg) {
  if (pthread_mutex_trylock(&m) == 0) {
    value = value + 1;
    pthread_mutex_unlock(&m);
  }
  return NULL;
}
int main() {
  pthread_t a, b;
  pthread_create(&a, NULL, worker, NULL);
  pthread_create(&b, NULL, worker, NULL);
  return 0;
}
