// expect: race
#include <pthread.h>
int g;
void *worker(void *arg) {
  g = 1;
  return NULL;
}
int main() {
  pthread_t t;
  pthread_create(&t, NULL, worker, NULL);
  g = 2;
  pthread_join(t, NULL);
  return 0;
}
