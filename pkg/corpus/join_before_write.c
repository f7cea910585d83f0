// expect: race_free
#include <pthread.h>
int g;
void *worker(void *arg) {
  g = 1;
  return NULL;
}
int main() {
  pthread_t t;
  pthread_create(&t, NULL, worker, NULL);
  pthread_join(t, NULL);
  g = 2;
  return 0;
}
