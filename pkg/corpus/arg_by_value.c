// expect: race_free
#include <pthread.h>
int results[2];
void *worker(void *arg) {
  int *slot = (int *)arg;
  *slot = 1;
  return NULL;
}
int main() {
  pthread_t a, b;
  pthread_create(&a, NULL, worker, &results[0]);
  pthread_create(&b, NULL, worker, &results[1]);
  return 0;
}
