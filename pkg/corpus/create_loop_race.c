// expect: race
// Threads created in a loop share an unprotected counter.
#include <pthread.h>
int hits;
void *worker(void *arg) {
  hits++;
  return NULL;
}
int main() {
  pthread_t t[2];
  for (int i = 0; i < 2; i++)
    pthread_create(&t[i], NULL, worker, NULL);
  return 0;
}
