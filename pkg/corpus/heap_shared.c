// expect: race
#include <pthread.h>
void *worker(void *arg) {
  int *cell = (int *)arg;
  *cell = 2;
  return NULL;
}
int main() {
  pthread_t t;
  int *cell = malloc(sizeof(int));
  pthread_create(&t, NULL, worker, cell);
  *cell = 1;
  pthread_join(t, NULL);
  return 0;
}
